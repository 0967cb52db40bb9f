use std::f64::consts::PI;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use uval::cone::{first_variation, is_crofton_positive, is_monotone, is_positive};
use uval::kinematic::{
    additive_kinematic, factor_common, kinematic, principal_kinematic, principal_kinematic_primitive,
    render_factored, tasaki_matrix_closed,
};
use uval::numeric::{mc_crofton, Frame, McConfig};
use uval::selftest::{self, Level};
use uval::sl2::{lefschetz_decompose, primitive_general, Sl2Op};
use uval::valspec::parse_valspec;
use uval::valuation::Basis;
use uval::{ExactMatrix, ExactValuation, Rational, UvalError};

#[derive(Parser)]
#[command(name = "uval", version, about = "Unitary-invariant valuations on C^n: exact algebra and integral geometry")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConeTest {
    Positive,
    Monotone,
    Crofton,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Mu,
    Tau,
    Poly,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    L,
    Lambda,
    H,
    Decompose,
}

#[derive(Subcommand)]
enum Command {
    /// Tasaki matrix T^n_k (k <= n).
    Tasaki {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Principal kinematic formula.
    Pkf {
        #[arg(long)]
        n: usize,
        /// Write both legs in the primitive basis.
        #[arg(long)]
        primitive: bool,
    },
    /// Kinematic formula k(m) of an invariant valuation m.
    Kinematic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        val: String,
        /// Divide by the volume of CP^n (probability normalization).
        #[arg(long)]
        cpn: bool,
    },
    /// Additive kinematic formula a(m).
    Additive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        val: String,
    },
    /// Membership in the positive, monotone or Crofton-positive cone.
    Cone {
        #[arg(long, value_enum)]
        test: ConeTest,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        val: String,
    },
    /// Rewrite a valuation in another basis.
    Convert {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        val: String,
        #[arg(long, value_enum, default_value = "mu")]
        to: Target,
    },
    /// Apply L, Λ, H, or decompose into primitives.
    Sl2 {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long)]
        val: String,
    },
    /// Primitive element π_{k,r}.
    Primitive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value = "tau")]
        to: Target,
    },
    /// Monte-Carlo check of the Crofton formula for flat pieces.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Multiple Kähler angle of E; entries are numbers or pi/d.
        #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
        angles: Vec<f64>,
        /// Multiple Kähler angle of the orthogonal complement of F.
        #[arg(long = "co-angles", value_delimiter = ',', value_parser = parse_angle)]
        co_angles: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "UVAL_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long, default_value = "quick")]
        level: Level,
    },
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let pi_over = |d: &str| d.trim().parse::<f64>().map(|d| PI / d).map_err(|e| e.to_string());
    if let Some(d) = s.strip_prefix("pi/").or_else(|| s.strip_prefix("π/")) {
        return pi_over(d);
    }
    if s == "pi" || s == "π" {
        return Ok(PI);
    }
    s.parse::<f64>().map_err(|e| format!("bad angle '{s}': {e}"))
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<UvalError> for Failure {
    fn from(e: UvalError) -> Self {
        match e {
            UvalError::UndecidableSign(_) | UvalError::RouteMismatch(_) => Failure::Failed(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn matrix_json(m: &ExactMatrix) -> Value {
    let (factor, reduced) = factor_common(m);
    json!({
        "factor": factor,
        "factored": reduced.to_rows(),
        "matrix": m.to_rows(),
        "text": render_factored(m),
    })
}

fn valuation_json(v: &ExactValuation) -> Value {
    json!({
        "expr": v.to_string(),
        "tau": v.render(Basis::Tau),
        "valuation": v,
    })
}

fn render_valuation(v: &ExactValuation, to: Target, json: bool) -> String {
    match (to, json) {
        (Target::Json, _) | (_, true) => valuation_json(v).to_string(),
        (Target::Mu, false) => v.to_string(),
        (Target::Tau, false) => v.render(Basis::Tau),
        (Target::Poly, false) => v.to_monomial().to_string(),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let json = cli.json;
    let out = match cli.command {
        Command::Tasaki { n, k } => {
            let t = tasaki_matrix_closed::<Rational>(n, k)?;
            if json {
                let mut v = matrix_json(&t);
                v["n"] = json!(n);
                v["k"] = json!(k);
                v.to_string()
            } else {
                render_factored(&t)
            }
        }
        Command::Pkf { n, primitive } => {
            let t = if primitive { principal_kinematic_primitive::<Rational>(n)? } else { principal_kinematic::<Rational>(n)? };
            tensor_out(&t, json)
        }
        Command::Kinematic { n, val, cpn } => {
            let mut t = kinematic(n, &parse_valspec(&val, n)?)?;
            if cpn {
                t = t.cpn_normalize()?;
            }
            tensor_out(&t, json)
        }
        Command::Additive { n, val } => tensor_out(&additive_kinematic(n, &parse_valspec(&val, n)?)?, json),
        Command::Cone { test, n, val } => {
            let v = parse_valspec(&val, n)?;
            let verdict = match test {
                ConeTest::Positive => is_positive(&v)?,
                ConeTest::Monotone => is_monotone(&v)?,
                ConeTest::Crofton => is_crofton_positive(&v)?,
            };
            if json {
                let mut out = json!({ "valuation": v.to_string(), "verdict": verdict });
                if matches!(test, ConeTest::Monotone) {
                    out["first_variation"] = json!(first_variation(&v)?.to_string());
                }
                out.to_string()
            } else {
                match verdict.witness {
                    None => "member".to_string(),
                    Some(w) => format!("not a member: {w}"),
                }
            }
        }
        Command::Convert { n, val, to } => render_valuation(&parse_valspec(&val, n)?, to, json),
        Command::Sl2 { n, op, val } => {
            let v = parse_valspec(&val, n)?;
            let apply = |o: Sl2Op| render_valuation(&o.apply(&v), Target::Mu, json);
            match op {
                OpArg::L => apply(Sl2Op::L),
                OpArg::Lambda => apply(Sl2Op::Lambda),
                OpArg::H => apply(Sl2Op::H),
                OpArg::Decompose => {
                    let terms = lefschetz_decompose(&v)?;
                    if json {
                        let items: Vec<Value> =
                            terms.iter().map(|t| json!({ "k": t.k, "r": t.r, "coeff": t.coeff })).collect();
                        Value::Array(items).to_string()
                    } else {
                        uval::valuation::render_sum(terms.iter().map(|t| (format!("pi[{},{}]", t.k, t.r), t.coeff.clone())))
                    }
                }
            }
        }
        Command::Primitive { n, k, r, to } => render_valuation(&primitive_general::<Rational>(n, k, r)?, to, json),
        Command::Mc { n, k, angles, co_angles, samples, seed, threads } => {
            let e = Frame::model(n, k, &angles)?;
            let f = Frame::model(n, k, &co_angles)?.complement()?;
            let r = mc_crofton(n, k, &e, &f, &McConfig { samples, seed, threads })?;
            if json {
                serde_json::to_string(&r).expect("report serializes")
            } else {
                let exact = r.prediction_exact.as_ref().map_or("n/a".to_string(), |p| p.to_string());
                format!(
                    "estimate   {:.6}\nstderr     {:.6}\nprediction {:.6} (exact {exact})\nsigma      {:.3}\nsamples    {}",
                    r.estimate, r.stderr, r.prediction_float, r.sigma, r.samples
                )
            }
        }
        Command::Selftest { level } => {
            let report = selftest::run(level);
            let text = if json {
                serde_json::to_string(&report).expect("report serializes")
            } else {
                let mut lines: Vec<String> = report
                    .checks
                    .iter()
                    .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                    .collect();
                lines.push(format!("{} passed, {} failed", report.passed, report.failed));
                lines.join("\n")
            };
            if report.failed > 0 {
                return Err(Failure::Failed(text));
            }
            text
        }
    };
    Ok(out)
}

fn tensor_out(t: &uval::ExactTensor, json: bool) -> String {
    if json {
        serde_json::to_string(t).expect("tensor serializes")
    } else {
        t.to_string().trim_end().to_string()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(std::io::stdout(), "{msg}");
            ExitCode::from(1)
        }
    }
}
