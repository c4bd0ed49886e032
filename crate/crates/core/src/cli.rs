//! The `newform` command-line tool.

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::characters::{
    enumerate_characters, format_angle, gauss_sum, parse_character, HeckeCharacter, NumericalCharacter,
};
use crate::coefficients::{sample_newform, twist_coefficients, CoefficientVector, IdealTable};
use crate::error::Error;
use crate::field::NumberField;
use crate::ideal::{parse_ideal, Ideal};
use crate::selftest::{run_all, run_check, SuiteConfig, CHECKS};
use crate::twist::{classify_characters, classify_regime, decompose_primitive, RegimeInput};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "newform", version, about = "Hilbert newform twist calculus over real quadratic fields")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Seed for sampled newforms; NEWFORM_SEED takes precedence.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Norm bound for coefficient vectors.
    #[arg(long, default_value_t = 2000, global = true)]
    pub bound: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ring of integers, discriminant, units and different.
    Field {
        #[arg(long)]
        field: i64,
    },
    /// Prime factorisation of an ideal.
    Factor {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        ideal: String,
    },
    /// Characters of (O/N)^x as a JSON array.
    Chars {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        modulus: String,
        #[arg(long)]
        conductor: Option<String>,
        #[arg(long)]
        extendable: bool,
    },
    /// Conductor of a character.
    Conductor {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        modulus: String,
        /// Character spec or a file holding one.
        #[arg(long = "char")]
        character: String,
    },
    /// Gauss sum of a character with prime-power conductor.
    Gauss {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        modulus: String,
        #[arg(long = "char")]
        character: String,
    },
    /// Coefficients of a sampled newform up to the norm bound.
    Coeffs {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        level: String,
        #[arg(long = "char")]
        character: String,
        #[arg(long, default_value_t = 2)]
        k0: u32,
    },
    /// Twist a sampled newform by a character and classify the twist.
    Twist {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        level: String,
        #[arg(long = "char")]
        character: String,
        #[arg(long, default_value_t = 2)]
        k0: u32,
        #[arg(long)]
        psi_modulus: String,
        #[arg(long)]
        psi: String,
    },
    /// Classify a twist configuration from its conductor exponents.
    Regime {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        p: String,
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        ephi: u32,
        #[arg(long)]
        epsi: u32,
        /// Prime-to-p part of the level.
        #[arg(long)]
        n0: Option<String>,
        #[arg(long)]
        conjugate: bool,
        #[arg(long)]
        coprime: bool,
    },
    /// Summands of the primitive decomposition at p.
    Decompose {
        #[arg(long)]
        field: i64,
        #[arg(long)]
        level: String,
        #[arg(long = "char")]
        character: String,
        #[arg(long)]
        p: String,
    },
    /// Run the self-test suite.
    Selftest {
        /// Fields to test; repeatable, defaults to 1 and 5.
        #[arg(long)]
        field: Vec<i64>,
        /// Run only the named check.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
        check: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

/// Run with the given arguments, writing to `out` and `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let seed = match std::env::var("NEWFORM_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                let _ = writeln!(err, "error: NEWFORM_SEED must be an unsigned integer, got {s:?}");
                return 2;
            }
        },
        Err(_) => cli.seed,
    };
    let ctx = Ctx { format: cli.format, seed, bound: cli.bound };
    match dispatch(&ctx, &cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {}: {}", e.name(), detail(&e));
            1
        }
    }
}

fn detail(e: &Error) -> String {
    let s = e.to_string();
    match s.split_once(": ") {
        Some((head, rest)) if head == e.name() => rest.to_string(),
        _ => s,
    }
}

struct Ctx {
    format: Format,
    seed: u64,
    bound: u64,
}

impl Ctx {
    fn json(&self) -> bool {
        self.format == Format::Json
    }

    fn envelope(&self, command: &str, config: Value, result: impl Serialize) -> Value {
        let mut cfg = json!({ "seed": self.seed, "bound": self.bound });
        if let (Value::Object(c), Value::Object(extra)) = (&mut cfg, config) {
            c.extend(extra);
        }
        json!({ "schema": "1", "command": command, "config": cfg, "result": result })
    }
}

fn emit_json(out: &mut dyn Write, v: &impl Serialize) -> Res<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out, "{s}").map_err(|e| Failure::Usage(e.to_string()))
}

fn field(d: i64) -> Res<NumberField> {
    Ok(NumberField::new(d)?)
}

fn ideal(k: &NumberField, s: &str) -> Res<Ideal> {
    Ok(parse_ideal(k.ring(), s)?)
}

/// A character argument: the contents of a file when the argument names one,
/// otherwise the argument itself.
fn char_spec(arg: &str) -> Res<String> {
    let p = Path::new(arg);
    if p.is_file() {
        return std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {arg}: {e}")));
    }
    let looks_like_path = arg.ends_with(".json") || arg.ends_with(".txt");
    if looks_like_path {
        return Err(Failure::Usage(format!("character file {arg} does not exist")));
    }
    Ok(arg.to_string())
}

fn character(k: &NumberField, modulus: &Ideal, arg: &str) -> Res<NumericalCharacter> {
    Ok(parse_character(k, modulus, &char_spec(arg)?)?)
}

#[derive(Serialize)]
struct CharacterInfo {
    modulus: String,
    angles: Vec<String>,
    order: u64,
    conductor: String,
    extendable: bool,
    sign_type: Option<Vec<u8>>,
}

fn character_info(c: &NumericalCharacter) -> CharacterInfo {
    CharacterInfo {
        modulus: c.modulus().to_string(),
        angles: c.angles().iter().map(format_angle).collect(),
        order: c.order(),
        conductor: c.conductor().to_string(),
        extendable: c.is_extendable(),
        sign_type: c.sign_type(),
    }
}

fn dispatch(ctx: &Ctx, cmd: &Command, out: &mut dyn Write) -> Res<i32> {
    let w = |out: &mut dyn Write, s: String| -> Res<()> {
        writeln!(out, "{s}").map_err(|e| Failure::Usage(e.to_string()))
    };
    match cmd {
        Command::Field { field: d } => {
            let k = field(*d)?;
            let info = json!({
                "d": k.d(),
                "degree": k.degree(),
                "discriminant": k.discriminant(),
                "integral_basis": k.integral_basis(),
                "fundamental_unit": k.fundamental_unit().map(|u| u.to_string()),
                "totally_positive_unit": k.totally_positive_unit().to_string(),
                "different": k.different().to_string(),
                "narrow_class_number_one": k.narrow_class_number_one(),
            });
            if ctx.json() {
                emit_json(out, &ctx.envelope("field", json!({ "field": d }), &info))?;
            } else {
                w(out, format!("field Q(sqrt {})", k.d()))?;
                w(out, format!("degree {}", k.degree()))?;
                w(out, format!("discriminant {}", k.discriminant()))?;
                w(out, format!("integral basis {}", k.integral_basis().join(", ")))?;
                if let Some(u) = k.fundamental_unit() {
                    w(out, format!("fundamental unit {u}"))?;
                }
                w(out, format!("totally positive unit {}", k.totally_positive_unit()))?;
                w(out, format!("different {}", k.different()))?;
            }
        }
        Command::Factor { field: d, ideal: s } => {
            let k = field(*d)?;
            let i = ideal(&k, s)?;
            let fac = i.factor()?;
            let (num, den) = i.norm_ratio();
            if ctx.json() {
                let f: Vec<Value> = fac.iter().map(|(p, e)| json!({ "prime": p.to_string(), "exponent": e, "norm": p.norm() })).collect();
                let norm = if den == 1 { json!(num) } else { json!(format!("{num}/{den}")) };
                let r = json!({ "ideal": i.to_string(), "norm": norm, "factors": f });
                emit_json(out, &ctx.envelope("factor", json!({ "field": d, "ideal": i.to_string() }), &r))?;
            } else {
                let norm = if den == 1 { num.to_string() } else { format!("{num}/{den}") };
                w(out, format!("{i} norm {norm}"))?;
                for (p, e) in fac {
                    w(out, format!("{p}^{e} (norm {})", p.norm()))?;
                }
            }
        }
        Command::Chars { field: d, modulus, conductor, extendable } => {
            let k = field(*d)?;
            let m = ideal(&k, modulus)?;
            let c = conductor.as_deref().map(|c| ideal(&k, c)).transpose()?;
            let chars = enumerate_characters(&k, &m, c.as_ref(), *extendable)?;
            let infos: Vec<CharacterInfo> = chars.iter().map(character_info).collect();
            if ctx.json() {
                let cfg = json!({
                    "field": d,
                    "modulus": m.to_string(),
                    "conductor": c.map(|c| c.to_string()),
                    "extendable": extendable,
                });
                emit_json(out, &ctx.envelope("chars", cfg, &infos))?;
            } else {
                emit_json(out, &infos)?;
            }
        }
        Command::Conductor { field: d, modulus, character: c } => {
            let k = field(*d)?;
            let m = ideal(&k, modulus)?;
            let chi = character(&k, &m, c)?;
            let cond = chi.conductor();
            let exps: Vec<Value> = m
                .factor()?
                .into_iter()
                .map(|(p, _)| json!({ "prime": p.to_string(), "exponent": chi.exponential_conductor(&p) }))
                .collect();
            if ctx.json() {
                let r = json!({
                    "character": &chi,
                    "conductor": cond.to_string(),
                    "exponents": exps,
                    "primitive": chi.is_primitive(),
                });
                emit_json(out, &ctx.envelope("conductor", json!({ "field": d, "modulus": m.to_string() }), &r))?;
            } else {
                w(out, format!("conductor {cond}"))?;
                for (p, _) in m.factor()? {
                    w(out, format!("e at {p}: {}", chi.exponential_conductor(&p)))?;
                }
            }
        }
        Command::Gauss { field: d, modulus, character: c } => {
            let k = field(*d)?;
            let m = ideal(&k, modulus)?;
            let psi = HeckeCharacter::new(character(&k, &m, c)?)?;
            let g = gauss_sum(&psi)?;
            if ctx.json() {
                let r = json!({
                    "conductor": g.conductor.to_string(),
                    "re": g.re,
                    "im": g.im,
                    "abs_squared": g.value().norm_sqr(),
                    "conductor_norm": g.modulus_norm,
                });
                emit_json(out, &ctx.envelope("gauss", json!({ "field": d, "modulus": m.to_string() }), &r))?;
            } else {
                w(out, format!("tau = {:.10} {:+.10}i", g.re, g.im))?;
                w(out, format!("|tau|^2 = {:.10} (conductor {} of norm {})", g.value().norm_sqr(), g.conductor, g.modulus_norm))?;
            }
        }
        Command::Coeffs { field: d, level, character: c, k0 } => {
            let k = field(*d)?;
            let n = ideal(&k, level)?;
            let chi = HeckeCharacter::new(character(&k, &n, c)?)?;
            let f = sample_newform(&n, &chi, *k0, ctx.seed)?;
            let table = IdealTable::new(&k, ctx.bound);
            let v = f.truncate(&table, ctx.bound)?;
            let cfg = json!({ "field": d, "level": n.to_string(), "k0": k0, "character": &chi });
            write_coefficients(ctx, out, "coeffs", cfg, &v)?;
        }
        Command::Twist { field: d, level, character: c, k0, psi_modulus, psi } => {
            let k = field(*d)?;
            let n = ideal(&k, level)?;
            let chi = HeckeCharacter::new(character(&k, &n, c)?)?;
            let pm = ideal(&k, psi_modulus)?;
            let psi = HeckeCharacter::new(character(&k, &pm, psi)?)?;
            let f = sample_newform(&n, &chi, *k0, ctx.seed)?;
            let table = IdealTable::new(&k, ctx.bound);
            let v = twist_coefficients(&f.truncate(&table, ctx.bound)?, &psi);
            // classification when the twisting conductor is a prime power
            let fac = if psi.conductor().is_unit_ideal() { Vec::new() } else { psi.conductor().factor()? };
            let report = match fac.as_slice() {
                [(p, _)] => Some(classify_characters(&chi, &psi, p)?),
                _ => None,
            };
            let cfg = json!({
                "field": d,
                "level": n.to_string(),
                "k0": k0,
                "character": &chi,
                "psi": &psi,
                "regime": report,
            });
            write_coefficients(ctx, out, "twist", cfg, &v)?;
        }
        Command::Regime { field: d, p, nu, ephi, epsi, n0, conjugate, coprime } => {
            let k = field(*d)?;
            let p = ideal(&k, p)?;
            let n0 = match n0 {
                Some(s) => ideal(&k, s)?,
                None => Ideal::unit(k.ring()),
            };
            let input = RegimeInput {
                p: p.clone(),
                nu: *nu,
                e_phi: *ephi,
                e_psi: *epsi,
                n0: n0.clone(),
                conjugate: *conjugate,
                coprime: *coprime,
            };
            let r = classify_regime(&input)?;
            if ctx.json() {
                let cfg = json!({
                    "field": d, "p": p.to_string(), "nu": nu, "ephi": ephi, "epsi": epsi,
                    "n0": n0.to_string(), "conjugate": conjugate, "coprime": coprime,
                });
                emit_json(out, &ctx.envelope("regime", cfg, &r))?;
            } else {
                emit_json(out, &r)?;
            }
        }
        Command::Decompose { field: d, level, character: c, p } => {
            let k = field(*d)?;
            let n = ideal(&k, level)?;
            let p = ideal(&k, p)?;
            let phi = HeckeCharacter::new(character(&k, &n, c)?)?;
            let s = decompose_primitive(&n, &phi, &p)?;
            if ctx.json() {
                let cfg = json!({ "field": d, "level": n.to_string(), "p": p.to_string(), "character": &phi });
                emit_json(out, &ctx.envelope("decompose", cfg, &s))?;
            } else {
                emit_json(out, &s)?;
            }
        }
        Command::Selftest { field: ds, check } => {
            let ds = if ds.is_empty() { vec![1, 5] } else { ds.clone() };
            for &d in &ds {
                field(d)?;
            }
            let cfg = SuiteConfig::new(ds.clone(), ctx.seed, ctx.bound);
            let results = match check {
                Some(name) => vec![run_check(name, &cfg).expect("validated check name")],
                None => run_all(&cfg),
            };
            let ok = results.iter().all(|r| r.passed());
            if ctx.json() {
                let r = json!({ "passed": ok, "checks": results });
                emit_json(out, &ctx.envelope("selftest", json!({ "fields": ds, "check": check }), &r))?;
            } else {
                w(out, format!("# seed={} bound={} fields={:?}", ctx.seed, ctx.bound, ds))?;
                w(out, format!("{:<6} {:<26} {:>8} {:>8} {:>11} {:>7}", "status", "check", "cases", "failures", "max_dev", "tol"))?;
                for r in &results {
                    w(
                        out,
                        format!(
                            "{:<6} {:<26} {:>8} {:>8} {:>11.3e} {:>7.0e}",
                            if r.passed() { "PASS" } else { "FAIL" },
                            r.name,
                            r.cases,
                            r.failures,
                            r.max_deviation,
                            r.tolerance
                        ),
                    )?;
                    for d in &r.detail {
                        w(out, format!("       {d}"))?;
                    }
                }
                w(out, if ok { "all checks passed" } else { "some checks failed" }.to_string())?;
            }
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn write_coefficients(ctx: &Ctx, out: &mut dyn Write, command: &str, cfg: Value, v: &CoefficientVector) -> Res<()> {
    if ctx.json() {
        return emit_json(out, &ctx.envelope(command, cfg, v.to_entries()));
    }
    let io = |e: std::io::Error| Failure::Usage(e.to_string());
    writeln!(out, "# seed={} bound={} {}", ctx.seed, ctx.bound, v.provenance()).map_err(io)?;
    for (m, c) in v.entries() {
        writeln!(out, "{m} {:.12e} {:.12e}", c.re, c.im).map_err(io)?;
    }
    Ok(())
}
