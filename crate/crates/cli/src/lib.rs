//! The `ccvp` command line.
//!
//! Exit codes: 0 when the requested condition holds, 1 when it was checked
//! and fails, 2 on usage, parse, dimension or I/O errors.

mod args;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use ccvp_core::certify::{
    check_bakkt, convex_global_claim, kkt_residual, parse_certificate, search_kkt_multipliers,
    verify_akkt_certificate, write_certificate, AkktCertificate, ConvexClaim, ResidualRecord, VerifyConfig,
};
use ccvp_core::cq::{cq_report, ProbeConfig};
use ccvp_core::fixtures;
use ccvp_core::generate::{generate_akkt, DescentRule, PenaltyConfig};
use ccvp_core::model::parse_problem;
use ccvp_core::Problem;
use clap::Parser;

use args::{Cli, Command, Common, MultiplierArgs, PenaltyArgs, ProbeArgs};
use report::{Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ccvp_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl From<ccvp_core::model::ModelError> for CliError {
    fn from(e: ccvp_core::model::ModelError) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let machine = common_of(&cli.command).machine;
    match dispatch(cli.command) {
        Ok(Outcome::Report(r)) => {
            let text = if machine { r.machine() } else { r.human() };
            let _ = out.write_all(text.as_bytes());
            r.exit_code()
        }
        Ok(Outcome::Text(t)) => {
            let _ = out.write_all(t.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", one_line(&e.to_string()));
            2
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn common_of(c: &Command) -> &Common {
    match c {
        Command::CheckKkt { common, .. }
        | Command::VerifyAkkt { common, .. }
        | Command::Generate { common, .. }
        | Command::Cq { common, .. }
        | Command::Example { common, .. } => common,
    }
}

enum Outcome {
    Report(Report),
    Text(String),
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    let report = match cmd {
        Command::CheckKkt {
            problem,
            point,
            multipliers,
            common,
        } => {
            let prob = load_problem(&problem)?;
            let x = resolve_point(&prob, point.point.as_deref(), Some("xbar"))?;
            check_kkt(&prob, &x, &multipliers, tol(&common)?)?
        }
        Command::VerifyAkkt { problem, cert, common } => {
            let prob = load_problem(&problem)?;
            let text = read(&cert)?;
            verify(&prob, &parse_certificate(&text)?, tol(&common)?)?
        }
        Command::Generate {
            problem,
            point,
            lambda,
            penalty,
            out,
            common,
        } => {
            let prob = load_problem(&problem)?;
            let x0 = match point.point.as_deref() {
                Some(p) => resolve_point(&prob, Some(p), None)?,
                None => prob.point("x0").map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; prob.n()]),
            };
            let lambda = parse_reals("--lambda", &lambda)?;
            generate(&prob, &lambda, &x0, &penalty, out.as_deref(), tol(&common)?)?
        }
        Command::Cq {
            problem,
            point,
            probe,
            common,
        } => {
            tol(&common)?;
            let prob = load_problem(&problem)?;
            let x = resolve_point(&prob, point.point.as_deref(), Some("xbar"))?;
            cq(&prob, &x, &probe)?
        }
        Command::Example {
            id,
            action,
            multipliers,
            probe,
            out,
            common,
        } => {
            let fx = fixtures::example(id)?;
            if let Some(path) = &out {
                write(path, fx.source)?;
            }
            if action.verify_akkt {
                let cert = match (&fx.certificate, &fx.multipliers) {
                    (Some(c), _) => c.clone(),
                    (None, Some((l, m))) => AkktCertificate::constant(l.clone(), fx.x_bar.clone(), m.clone(), 1),
                    (None, None) => {
                        return Err(CliError::Usage(format!("example {id} has no reference certificate")));
                    }
                };
                let default = if id == 1 { EXAMPLE1_CERT_TOL } else { DEFAULT_TOL };
                verify(&fx.problem, &cert, tol_or(&common, default)?)?
            } else if action.check_kkt {
                check_kkt(&fx.problem, &fx.x_bar, &multipliers, tol(&common)?)?
            } else if action.cq {
                cq(&fx.problem, &fx.x_bar, &probe)?
            } else if out.is_some() {
                return Ok(Outcome::Text(String::new()));
            } else {
                return Ok(Outcome::Text(fx.source.to_string()));
            }
        }
    };
    Ok(Outcome::Report(report))
}

const DEFAULT_TOL: f64 = 1e-6;
/// Complementarity of the example 1 sequence is `2/(3k)`, about 6.7e-4 at
/// its last step.
const EXAMPLE1_CERT_TOL: f64 = 1e-3;

fn tol_or(c: &Common, default: f64) -> Result<f64> {
    match c.tol {
        None => Ok(default),
        Some(t) if t.is_finite() && t >= 0.0 => Ok(t),
        Some(t) => Err(CliError::Usage(format!("--tol must be a finite nonnegative number, got {t}"))),
    }
}

fn tol(c: &Common) -> Result<f64> {
    tol_or(c, DEFAULT_TOL)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_problem(path: &Path) -> Result<Problem> {
    let text = read(path)?;
    parse_problem(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Reals separated by commas and/or whitespace.
fn parse_reals(flag: &str, text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{flag}: malformed number '{t}'")))
        })
        .collect()
}

fn resolve_point(prob: &Problem, arg: Option<&str>, default: Option<&str>) -> Result<Vec<f64>> {
    let Some(arg) = arg.or(default) else {
        return Err(CliError::Usage("--point is required".into()));
    };
    if let Some(p) = prob.point(arg) {
        return Ok(p.to_vec());
    }
    if arg.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') && arg.parse::<f64>().is_err() {
        return Err(CliError::Usage(format!("unknown point '{arg}'")));
    }
    let x = parse_reals("--point", arg)?;
    if x.len() != prob.n() {
        return Err(CliError::Usage(format!("--point has {} entries, problem has {} variables", x.len(), prob.n())));
    }
    Ok(x)
}

fn residual_fields(r: &mut Report, rec: &ResidualRecord) {
    r.field("stationarity", rec.stationarity)
        .field("complementarity", rec.complementarity)
        .field("feasibility", rec.feasibility)
        .field("simplex_defect", rec.simplex_defect)
        .field("polar_defect", rec.polar_defect);
}

fn check_kkt(prob: &Problem, x: &[f64], mult: &MultiplierArgs, tol: f64) -> Result<Report> {
    let mut r = Report::new("KKT check");
    r.field("point", x).field("tol", tol);
    match (&mult.lambda, &mult.mu) {
        (Some(l), Some(m)) => {
            let lambda = parse_reals("--lambda", l)?;
            let mu = parse_reals("--mu", m)?;
            let rec = kkt_residual(prob, x, &lambda, &mu, None)?;
            r.holds = rec.within(tol);
            r.field("mode", "given").field("lambda", lambda).field("mu", mu).field("residual_max", rec.max());
            residual_fields(&mut r, &rec);
        }
        _ => {
            let s = search_kkt_multipliers(prob, x, tol)?;
            let rec = kkt_residual(prob, x, &s.lambda, &s.mu, None)?;
            r.holds = s.kkt_holds;
            r.field("mode", "search")
                .field("min_residual", s.min_residual)
                .field("lambda", s.lambda)
                .field("mu", s.mu);
            residual_fields(&mut r, &rec);
        }
    }
    Ok(r)
}

fn verify(prob: &Problem, cert: &AkktCertificate, tol: f64) -> Result<Report> {
    let cfg = VerifyConfig {
        tol_final: tol,
        ..VerifyConfig::default()
    };
    let rep = verify_akkt_certificate(prob, cert, &cfg)?;
    let claim = convex_global_claim(prob, &rep)?;
    let mut r = Report::new("AKKT certificate");
    r.holds = rep.akkt_holds();
    r.field("lambda", rep.lambda.as_slice())
        .field("limit", rep.limit.as_slice())
        .field("steps", rep.residuals.len())
        .field("tol", tol)
        .field("converged_a0", rep.converged_a0)
        .field("converged_a1", rep.converged_a1)
        .field("converged_a2", rep.converged_a2)
        .field("bakkt", rep.bakkt)
        .field("tail_mu_norm_sup", rep.tail_mu_norm_sup)
        .field(
            "global_weak_efficient",
            match claim {
                ConvexClaim::GlobalWeakEfficient => "claimed",
                ConvexClaim::NoClaim => "no claim",
            },
        );
    let rows = rep
        .residuals
        .iter()
        .zip(&rep.mu_norms)
        .zip(&rep.limit_distances)
        .zip(&rep.variant_stationarity)
        .map(|(((rec, mu), d), v)| vec![rec.stationarity, rec.complementarity, rec.feasibility, *mu, *d, *v])
        .collect();
    r.table(Table {
        name: "step".into(),
        columns: ["stationarity", "complementarity", "feasibility", "mu_norm", "limit_distance", "stationarity_at_xk"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    Ok(r)
}

fn generate(
    prob: &Problem,
    lambda: &[f64],
    x0: &[f64],
    pa: &PenaltyArgs,
    out: Option<&Path>,
    tol: f64,
) -> Result<Report> {
    let config = PenaltyConfig {
        rho0: pa.rho0,
        gamma: pa.gamma,
        outer_iters: pa.outer,
        rule: if pa.steepest { DescentRule::SteepestDescent } else { DescentRule::Newton },
        ..PenaltyConfig::default()
    };
    let mut r = Report::new("Penalty AKKT generation");
    r.field("x0", x0).field("lambda", lambda);
    let g = match generate_akkt(prob, lambda, x0, &config) {
        Ok(g) => g,
        Err(ccvp_core::Error::Divergence { iteration, norm, .. }) => {
            r.field("diverged", true).field("iteration", iteration).field("x_norm", norm);
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = out {
        write(path, &write_certificate(&g.certificate))?;
        r.field("certificate", path.display().to_string());
    }
    let cfg = VerifyConfig {
        tol_final: tol,
        ..VerifyConfig::default()
    };
    let rep = verify_akkt_certificate(prob, &g.certificate, &cfg)?;
    r.holds = rep.akkt_holds();
    r.field("diverged", false)
        .field("limit", g.certificate.limit.as_slice())
        .field("tol", tol)
        .field("converged_a0", rep.converged_a0)
        .field("converged_a1", rep.converged_a1)
        .field("converged_a2", rep.converged_a2)
        .field("bakkt", check_bakkt(&rep, cfg.bakkt_bound));
    let rows = g
        .outer
        .iter()
        .zip(&rep.residuals)
        .map(|(o, rec)| {
            vec![
                o.rho,
                o.grad_norm,
                rec.stationarity,
                rec.complementarity,
                rec.feasibility,
                o.mu.iter().map(|m| m * m).sum::<f64>().sqrt(),
                o.inner_steps as f64,
            ]
        })
        .collect();
    r.table(Table {
        name: "outer".into(),
        columns: ["rho", "grad_norm", "stationarity", "complementarity", "feasibility", "mu_norm", "inner_steps"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    Ok(r)
}

fn cq(prob: &Problem, x: &[f64], pa: &ProbeArgs) -> Result<Report> {
    let probe_cfg = pa.probe_regularity.then(|| ProbeConfig {
        seed: pa.seed,
        ..ProbeConfig::default()
    });
    let rep = cq_report(prob, x, probe_cfg.as_ref())?;
    let mut r = Report::new("Constraint qualifications");
    r.field("point", x).field("rcq", rep.rcq.holds);
    if let Some(d) = &rep.rcq.failing_direction {
        r.field("rcq_failing_direction", d.as_slice());
    }
    match &rep.mfcq {
        Some(m) => {
            r.field("mfcq", m.holds).field("mfcq_slack", m.slack);
            if let Some(d) = &m.witness_d {
                r.field("mfcq_witness", d.as_slice());
            }
        }
        None => {
            r.field("mfcq", "not applicable (empty interior)");
        }
    }
    r.holds = match &rep.regularity_probe {
        Some(p) => {
            r.field("regularity_violation", p.violation)
                .field("probe_seed", pa.seed as usize)
                .field("probe_samples", p.samples_tested)
                .field("probe_max_distance", p.max_distance)
                .field("probe_per_scale_max", p.per_scale_max.as_slice());
            if let Some(s) = &p.worst_sample {
                r.field("probe_worst_x", s.x.as_slice())
                    .field("probe_worst_mu", s.mu.as_slice())
                    .field("probe_worst_w", s.w.as_slice());
            }
            !p.violation
        }
        None => rep.rcq.holds,
    };
    Ok(r)
}
