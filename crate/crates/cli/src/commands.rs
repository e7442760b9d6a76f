//! One function per subcommand. Each returns an [`Outcome`]; mathematical refusals are
//! outcomes with `refused` set, never errors.

use crate::config::{parse_json, RunConfig};
use crate::error::CliError;
use crate::output::{num, Outcome, Table};
use chamberflow_core::dense_subgroup::{dense_completion, eps_density_check, nonneg_integer_approx, DenseError, GeneratorSet};
use chamberflow_core::flags_hopf::{flow_action, hopf_coordinates};
use chamberflow_core::group_core::{cartan_projection, iwasawa_cocycle, jordan_projection};
use chamberflow_core::limit_cone::{contains_report, sample_cone, ConeKind};
use chamberflow_core::mixing_witness::{build_direction_family, mixing_overlap_demo, MixError, WitnessPlan};
use chamberflow_core::proximality::{certify_proximal, ProxError};
use chamberflow_core::representations::exterior_power;
use chamberflow_core::schottky::{certify_schottky, product_estimate_check, SchottkyError};
use chamberflow_core::{CartanVector, Flag, FlagBox, GroupElement, HopfBox, HopfPoint, Word};
use serde::Deserialize;
use serde_json::{json, Value};
use std::io::Read;
use std::path::Path;

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let name = if path == Path::new("-") { "<stdin>".to_string() } else { path.display().to_string() };
    parse_json(&read_input(path)?, &name)
}

fn read_matrix(path: &Path) -> Result<GroupElement, CliError> {
    let rows: Vec<Vec<f64>> = read_json(path)?;
    GroupElement::from_rows(&rows).map_err(|e| CliError::Usage(format!("matrix: {e}")))
}

/// Parses `a,b,c` into floats.
pub fn parse_csv(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{s:?} in {text:?}: {e}"))))
        .collect()
}

fn parse_cartan(text: &str) -> Result<CartanVector, CliError> {
    CartanVector::new(parse_csv(text)?).map_err(|e| CliError::Usage(format!("{text:?}: {e}")))
}

/// Parses `a:b:step` into the grid `a, a + step, ...` up to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts = parse_csv(&text.replace(':', ","))?;
    let [a, b, step] = parts[..] else {
        return Err(CliError::Usage(format!("grid {text:?} is not a:b:step")));
    };
    if !(step > 0.0) || !(b >= a) {
        return Err(CliError::Usage(format!("grid {text:?} needs a <= b and step > 0")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn frame_rows(f: &Flag) -> Vec<Vec<f64>> {
    let m = f.frame();
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn hopf_json(p: &HopfPoint) -> Value {
    json!({
        "plus": frame_rows(&p.pair.plus),
        "minus": frame_rows(&p.pair.minus),
        "opposition_margin": p.pair.opposition_margin,
        "apart": p.apart,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ProjectionKind {
    Cartan,
    Jordan,
    Iwasawa,
}

pub fn project(input: &Path, kind: ProjectionKind) -> Result<Outcome, CliError> {
    let g = read_matrix(input)?;
    let v = match kind {
        ProjectionKind::Cartan => cartan_projection(&g),
        ProjectionKind::Jordan => jordan_projection(&g),
        ProjectionKind::Iwasawa => iwasawa_cocycle(&g, &Flag::standard(g.dim())).map_err(CliError::compute)?,
    };
    Ok(Outcome::ok(to_value(&v)))
}

pub fn rep(input: &Path, k: usize) -> Result<Outcome, CliError> {
    let g = read_matrix(input)?;
    let m = exterior_power(&g, k).map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    Ok(Outcome::ok(json!({ "k": k, "dim": m.nrows(), "matrix": rows })))
}

pub fn certify(input: &Path, r: f64, eps: f64, grid_n: usize, k: usize) -> Result<Outcome, CliError> {
    let g = read_matrix(input)?;
    let m = exterior_power(&g, k).map_err(|e| CliError::Usage(e.to_string()))?;
    match certify_proximal(&m, r, eps, grid_n) {
        Ok(cert) => Ok(Outcome::ok(json!({ "proximal": true, "k": k, "certificate": cert }))),
        Err(e @ (ProxError::Refused(_) | ProxError::NotProximal { .. } | ProxError::Geometry { .. })) => {
            let reason = match &e {
                ProxError::Refused(refusal) => to_value(refusal),
                _ => Value::Null,
            };
            Ok(Outcome::refused(json!({ "proximal": false, "k": k, "message": e.to_string(), "refusal": reason })))
        }
        Err(e) => Err(CliError::compute(e)),
    }
}

fn parse_words(text: Option<&str>, generators: usize) -> Result<Vec<Word>, CliError> {
    match text {
        None => Ok((0..generators).map(Word::letter).collect()),
        Some(t) => t
            .split(',')
            .map(|w| Word::parse(w.trim(), generators).map_err(|e| CliError::Usage(format!("word {w:?}: {e}"))))
            .collect(),
    }
}

fn schottky_refusal(e: SchottkyError) -> Result<Outcome, CliError> {
    match e {
        SchottkyError::Generator { .. } | SchottkyError::Margin { .. } => Ok(Outcome::refused(json!({
            "schottky": false,
            "message": e.to_string(),
        }))),
        e => Err(CliError::compute(e)),
    }
}

pub fn schottky_certify(cfg: &RunConfig, words: Option<&str>) -> Result<Outcome, CliError> {
    let base = cfg.alphabet()?;
    let words = parse_words(words, base.len())?;
    match certify_schottky(&base, words, cfg.tol("r"), cfg.tol("eps"), cfg.cap("grid_n") as usize) {
        Ok(f) => Ok(Outcome::ok(json!({ "schottky": true, "family": f.summary() }))),
        Err(e) => schottky_refusal(e),
    }
}

pub fn schottky_estimate(cfg: &RunConfig, words: Option<&str>, word: &str) -> Result<Outcome, CliError> {
    let base = cfg.alphabet()?;
    let gens = parse_words(words, base.len())?;
    let family = match certify_schottky(&base, gens, cfg.tol("r"), cfg.tol("eps"), cfg.cap("grid_n") as usize) {
        Ok(f) => f,
        Err(e) => return schottky_refusal(e),
    };
    let w = Word::parse(word, family.len()).map_err(|e| CliError::Usage(format!("word {word:?}: {e}")))?;
    let report = product_estimate_check(&family, &w).map_err(CliError::compute)?;
    Ok(Outcome::ok(to_value(&report)))
}

pub fn hopf(input: &Path) -> Result<Outcome, CliError> {
    let g = read_matrix(input)?;
    Ok(Outcome::ok(hopf_json(&hopf_coordinates(&g))))
}

pub fn flow(input: &Path, theta: &str, t: f64) -> Result<Outcome, CliError> {
    let g = read_matrix(input)?;
    let theta = parse_cartan(theta)?;
    let p = flow_action(&hopf_coordinates(&g), &theta, t).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Outcome::ok(hopf_json(&p)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Jordan,
    Cartan,
}

impl From<KindArg> for ConeKind {
    fn from(k: KindArg) -> ConeKind {
        match k {
            KindArg::Jordan => ConeKind::Jordan,
            KindArg::Cartan => ConeKind::Cartan,
        }
    }
}

pub fn cone_sample(cfg: &RunConfig, depth: usize, kind: KindArg) -> Result<Outcome, CliError> {
    let cone = sample_cone(&cfg.alphabet()?, depth, kind.into()).map_err(CliError::compute)?;
    let header: Vec<String> = (1..=cfg.dim).map(|i| format!("x{i}")).collect();
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for ray in &cone.rays {
        table.push(ray.coords().iter().map(|&x| num(x)).collect());
    }
    Ok(Outcome::ok(to_value(&cone)).with_csv(table))
}

pub fn cone_contains(cfg: &RunConfig, depth: usize, kind: KindArg, theta: &str, slack: f64) -> Result<Outcome, CliError> {
    let cone = sample_cone(&cfg.alphabet()?, depth, kind.into()).map_err(CliError::compute)?;
    let theta = parse_cartan(theta)?;
    let report = contains_report(&cone, &theta, slack).map_err(CliError::compute)?;
    let value = json!({ "theta": theta, "slack": slack, "report": report });
    Ok(if report.inside { Outcome::ok(value) } else { Outcome::refused(value) })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseInput {
    vectors: Vec<Vec<f64>>,
    basis: Option<Vec<usize>>,
    eps: Option<f64>,
}

fn generator_set(input: DenseInput) -> Result<GeneratorSet, CliError> {
    match input.basis {
        Some(b) => GeneratorSet::new(input.vectors, b),
        None => GeneratorSet::auto(input.vectors),
    }
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn dense_eps(input: &DenseInput, eps: Option<f64>) -> Result<f64, CliError> {
    eps.or(input.eps).ok_or_else(|| CliError::Usage("eps is required, in the input or as --eps".into()))
}

pub fn dense_check(cfg: &RunConfig, input: &Path, eps: Option<f64>) -> Result<Outcome, CliError> {
    let data: DenseInput = read_json(input)?;
    let eps = dense_eps(&data, eps)?;
    let set = generator_set(data)?;
    let report = eps_density_check(&set, eps, &cfg.density_options()).map_err(|e| CliError::Usage(e.to_string()))?;
    let value = to_value(&report);
    Ok(if report.certified() { Outcome::ok(value) } else { Outcome::refused(value) })
}

pub fn dense_complete(cfg: &RunConfig, input: &Path, eps: Option<f64>) -> Result<Outcome, CliError> {
    let data: DenseInput = read_json(input)?;
    let eps = dense_eps(&data, eps)?;
    let set = generator_set(data)?;
    match dense_completion(&set, eps, &cfg.density_options()) {
        Ok(c) => Ok(Outcome::ok(to_value(&c))),
        Err(e @ (DenseError::NotDense { .. } | DenseError::Unverified { .. } | DenseError::InsufficientGenerators { .. })) => {
            let report = match &e {
                DenseError::NotDense { report } | DenseError::Unverified { report } => to_value(report),
                _ => Value::Null,
            };
            Ok(Outcome::refused(json!({ "message": e.to_string(), "report": report })))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxInput {
    ls: Vec<Vec<f64>>,
    target: Vec<f64>,
    eta: Option<f64>,
}

pub fn dense_approx(cfg: &RunConfig, input: &Path, eta: Option<f64>) -> Result<Outcome, CliError> {
    let data: ApproxInput = read_json(input)?;
    let eta = eta.or(data.eta).ok_or_else(|| CliError::Usage("eta is required, in the input or as --eta".into()))?;
    match nonneg_integer_approx(&data.ls, &data.target, eta, &cfg.approx_options()) {
        Ok(a) => Ok(Outcome::ok(to_value(&a))),
        Err(DenseError::Exhausted { best, coeffs }) => Ok(Outcome::refused(json!({
            "message": "integer search exhausted",
            "best_error": best,
            "best_coeffs": coeffs,
        }))),
        Err(e @ DenseError::OutsideCone) => Ok(Outcome::refused(json!({ "message": e.to_string() }))),
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

fn mix_refusal(e: MixError) -> Result<Outcome, CliError> {
    match e {
        MixError::Precondition(_) | MixError::Word(_) | MixError::Lp(_) => Err(CliError::compute(e)),
        e => {
            let detail = match &e {
                MixError::NeedsLargerT { t, t_min } => json!({ "t": t, "t_min": t_min }),
                MixError::Direction { margin } => json!({ "margin": margin }),
                MixError::NoFeasibleT { t_max } => json!({ "t_max": t_max }),
                MixError::Budget { t, best } => json!({ "t": t, "best": best }),
                MixError::Unverified { lambda_err, flag_err } => json!({ "lambda_err": lambda_err, "flag_err": flag_err }),
                _ => Value::Null,
            };
            Ok(Outcome::refused(json!({ "message": e.to_string(), "detail": detail })))
        }
    }
}

fn mix_plan(cfg: &RunConfig, theta: Option<&str>, eta: f64) -> Result<Result<WitnessPlan, MixError>, CliError> {
    let base = cfg.alphabet()?;
    let theta = match theta {
        Some(t) => parse_cartan(t)?,
        None => cfg.theta()?,
    };
    let h = cfg.h_word(base.len())?;
    let depth = cfg.cap("depth") as usize;
    Ok(build_direction_family(&base, &theta, depth, &cfg.direction_options())
        .and_then(|df| WitnessPlan::prepare(&df, &h, &cfg.witness_options(eta))))
}

fn plan_json(plan: &WitnessPlan, t_min: f64) -> Value {
    json!({
        "n": plan.n,
        "c_empirical": plan.c_empirical,
        "family": plan.family.gens.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "theta": plan.theta,
        "eta": plan.eta,
        "t_min": t_min,
    })
}

const WITNESS_COLUMNS: [&str; 5] = ["t", "lambda_err", "flag_err", "apart_err", "status"];

pub fn mix_witness(cfg: &RunConfig, theta: Option<&str>, x: Option<&str>, t: f64, eta: Option<f64>) -> Result<Outcome, CliError> {
    let eta = eta.unwrap_or(cfg.tol("eta"));
    let plan = match mix_plan(cfg, theta, eta)? {
        Ok(p) => p,
        Err(e) => return mix_refusal(e),
    };
    let x = match x {
        Some(x) => parse_cartan(x)?,
        None => CartanVector::zeros(cfg.dim),
    };
    let t_min = match plan.t_min(&x) {
        Ok(t) => t,
        Err(e) => return mix_refusal(e),
    };
    let w = match plan.witness(&x, t) {
        Ok(w) => w,
        Err(e) => return mix_refusal(e),
    };
    let mut table = Table::new(&WITNESS_COLUMNS);
    table.push(vec![num(w.t), num(w.lambda_err), num(w.flag_err), String::new(), "ok".into()]);
    Ok(Outcome::ok(json!({ "plan": plan_json(&plan, t_min), "witness": w })).with_csv(table))
}

pub fn mix_demo(cfg: &RunConfig, theta: Option<&str>, grid: Option<&str>, u: Option<&str>, v: Option<&str>, eta: Option<f64>) -> Result<Outcome, CliError> {
    let eta = eta.unwrap_or(cfg.tol("eta"));
    let plan = match mix_plan(cfg, theta, eta)? {
        Ok(p) => p,
        Err(e) => return mix_refusal(e),
    };
    let centre = |c: Option<&str>| -> Result<CartanVector, CliError> {
        c.map(parse_cartan).transpose().map(|c| c.unwrap_or_else(|| CartanVector::zeros(cfg.dim)))
    };
    let (u, v) = (centre(u)?, centre(v)?);
    let x = &v - &u;
    let t_min = match plan.t_min(&x) {
        Ok(t) => t,
        Err(e) => return mix_refusal(e),
    };
    let grid = match grid {
        Some(g) => parse_grid(g)?,
        None => (0..=20).map(|i| t_min.ceil() + i as f64).collect(),
    };
    let hopf_box = |c: CartanVector| HopfBox {
        flags: FlagBox {
            center: plan.family.flags[0].clone(),
            radius: plan.family.eps,
        },
        apart_center: c,
        apart_radius: eta,
    };
    let results = mixing_overlap_demo(&plan, &hopf_box(u), &hopf_box(v), &grid);
    let mut table = Table::new(&WITNESS_COLUMNS);
    let mut entries = Vec::new();
    let mut all_ok = true;
    for (t, r) in results {
        match r {
            Ok(o) => {
                table.push(vec![num(t), num(o.witness.lambda_err), num(o.witness.flag_err), num(o.apart_err), "ok".into()]);
                entries.push(json!({
                    "t": t,
                    "witness": o.witness,
                    "preimage": hopf_json(&o.preimage),
                    "point": hopf_json(&o.point),
                    "apart_err": o.apart_err,
                }));
            }
            Err(e) => {
                all_ok = false;
                table.push(vec![num(t), String::new(), String::new(), String::new(), "failed".into()]);
                entries.push(json!({ "t": t, "error": e.to_string() }));
            }
        }
    }
    let value = json!({ "plan": plan_json(&plan, t_min), "entries": entries });
    let outcome = if all_ok { Outcome::ok(value) } else { Outcome::refused(value) };
    Ok(outcome.with_csv(table))
}
