//! `ehyper`: evaluate elliptic hypergeometric objects and verify identities.

mod params;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ehyper::identities::{self, EvalConfig, Identity, IdentityReport};
use ehyper::integrals::{i1m, inm_det, inm_direct, v_function, v_qgt1_solution, TypeIParams, VParams};
use ehyper::quadrature::{QuadResult, QuadSpec};
use ehyper::report::{num, report_line, summarize_dir, summary_table};
use ehyper::sampler::{derived_seed, Sampler};
use ehyper::specfun::{elliptic_gamma, theta, TruncationPolicy};
use ehyper::{Error, Result, C64};
use rayon::prelude::*;

use params::Params;

const OUT_DIR_VAR: &str = "EHYPER_OUT_DIR";

#[derive(Parser)]
#[command(name = "ehyper", version, about = "Elliptic hypergeometric integrals and their identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one object at the given parameters.
    Eval {
        object: Object,
        /// JSON parameter file.
        #[arg(long, conflicts_with = "inline")]
        params: Option<PathBuf>,
        /// Parameters as a JSON string.
        #[arg(long)]
        inline: Option<String>,
        /// Cap on quadrature nodes (per axis for tensor rules).
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Run seeded residual checks.
    Verify {
        /// Identity name, or `all`.
        identity: String,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides every per-check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Restrict to one variant, as `N,M`.
        #[arg(long, value_parser = parse_nm)]
        nm: Option<(usize, i32)>,
        /// Report file (default: stdout, or a file in $EHYPER_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare tensor quadrature with the determinant reduction for n = 2.
    Bench {
        #[arg(long, value_parser = parse_nm, default_value = "2,0")]
        nm: (usize, i32),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative tolerance for both paths.
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
    },
    /// Summarize a directory of report files.
    Report { dir: PathBuf },
    /// List identities and their variants.
    List,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Object {
    Theta,
    Gamma,
    V,
    I1m,
    InmDirect,
    InmDet,
    UQgt1,
}

fn parse_nm(s: &str) -> std::result::Result<(usize, i32), String> {
    let (n, m) = s.split_once(',').ok_or("expected N,M")?;
    let n = n.trim().parse().map_err(|e| format!("N: {e}"))?;
    let m = m.trim().parse().map_err(|e| format!("M: {e}"))?;
    Ok((n, m))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Eval { object, params, inline, nodes, rtol } => cmd_eval(object, params, inline, nodes, rtol),
        Command::Verify { identity, trials, seed, tol, nm, out } => cmd_verify(&identity, trials, seed, tol, nm, out),
        Command::Bench { nm, seed, rtol } => cmd_bench(nm, seed, rtol),
        Command::Report { dir } => cmd_report(&dir),
        Command::List => cmd_list(),
    };
    ExitCode::from(code)
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    match e {
        Error::NotConverged(_) => 2,
        Error::SamplerInfeasible(_) => 3,
        _ => 1,
    }
}

fn spec_with(mut spec: QuadSpec, nodes: Option<usize>, rtol: Option<f64>) -> Result<QuadSpec> {
    if let Some(n) = nodes {
        spec.n_max = n;
        spec.n0 = spec.n0.min(n);
    }
    if let Some(r) = rtol {
        spec.rel_tol = r;
    }
    spec.validate()?;
    Ok(spec)
}

fn complex(z: C64) -> String {
    format!("[{},{}]", num(z.re), num(z.im))
}

fn quad_line(object: &str, r: &QuadResult, extra: &str) -> String {
    format!(
        "{{\"object\":\"{object}\",\"value\":{},\"err_est\":{},\"nodes_used\":{},\"converged\":{}{extra}}}",
        complex(r.value),
        num(r.err_est),
        r.nodes_used,
        r.converged
    )
}

fn exact(value: C64) -> QuadResult {
    QuadResult { value, err_est: 0.0, nodes_used: 0, converged: true, magnitude: value.norm() }
}

fn cmd_eval(
    object: Object,
    file: Option<PathBuf>,
    inline: Option<String>,
    nodes: Option<usize>,
    rtol: Option<f64>,
) -> u8 {
    let params = match (file, inline) {
        (Some(f), _) => Params::load(&f),
        (None, Some(s)) => Params::parse(&s),
        (None, None) => Err(Error::InvalidInput("one of --params or --inline is required".into())),
    };
    let name = object.to_possible_value().expect("named").get_name().to_string();
    match params.and_then(|p| eval(object, &p, nodes, rtol)) {
        Ok((r, extra)) => {
            println!("{}", quad_line(&name, &r, &extra));
            if r.converged {
                0
            } else {
                2
            }
        }
        Err(Error::NotConverged(r)) => {
            println!("{}", quad_line(&name, &r, ""));
            fail(&Error::NotConverged(r))
        }
        Err(e) => fail(&e),
    }
}

fn eval(object: Object, p: &Params, nodes: Option<usize>, rtol: Option<f64>) -> Result<(QuadResult, String)> {
    let policy = TruncationPolicy::default();
    let quad = || spec_with(QuadSpec::default(), nodes, rtol);
    let plain = |r: QuadResult| (r, String::new());
    match object {
        Object::Theta => {
            let base = p.p()?;
            let mut v = C64::new(1.0, 0.0);
            for z in p.z()? {
                v *= theta(z, base, &policy)?;
            }
            Ok(plain(exact(v)))
        }
        Object::Gamma => {
            let base = p.base()?;
            let mut v = C64::new(1.0, 0.0);
            for z in p.z()? {
                v *= elliptic_gamma(z, &base, &policy)?;
            }
            Ok(plain(exact(v)))
        }
        Object::V => {
            let t = eight(p.t()?)?;
            let vp = VParams::new(t, p.base()?, p.normalize_last)?;
            Ok(plain(v_function(&vp, &quad()?)?))
        }
        Object::I1m => {
            let (n, m) = p.nm(1)?;
            if n != 1 {
                return Err(Error::InvalidInput(format!("i1m is univariate, got n = {n}")));
            }
            let tp = TypeIParams::new(1, m, p.t()?, p.base()?, p.normalize_last)?;
            Ok(plain(i1m(&tp, &quad()?)?))
        }
        Object::InmDirect => {
            let (n, m) = p.nm(2)?;
            let tp = TypeIParams::new(n, m, p.t()?, p.base()?, p.normalize_last)?;
            let spec = spec_with(QuadSpec::tensor(), nodes, rtol)?;
            Ok(plain(inm_direct(&tp, &spec)?))
        }
        Object::InmDet => {
            let (n, m) = p.nm(2)?;
            let tp = TypeIParams::new(n, m, p.t()?, p.base()?, p.normalize_last)?;
            let d = inm_det(&tp, &quad()?)?;
            let r =
                QuadResult { value: d.value, err_est: 0.0, nodes_used: d.nodes_used, converged: true, magnitude: 0.0 };
            Ok((r, format!(",\"cond\":{}", num(d.cond))))
        }
        Object::UQgt1 => {
            let (pp, qq) = (p.p()?, p.q()?);
            let mut t = p.t()?;
            if p.normalize_last && t.len() == 8 {
                let rest: C64 = t[..7].iter().product();
                t[7] = (pp * qq).powi(2) / rest;
            }
            Ok(plain(v_qgt1_solution(&eight(t)?, pp, qq, &quad()?)?))
        }
    }
}

fn eight(t: Vec<C64>) -> Result<[C64; 8]> {
    let len = t.len();
    t.try_into().map_err(|_| Error::InvalidInput(format!("t needs 8 entries, got {len}")))
}

struct Job<'a> {
    id: &'a Identity,
    n: usize,
    m: i32,
    trial: u64,
}

fn cmd_verify(
    target: &str,
    trials: u64,
    seed: u64,
    tol: Option<f64>,
    nm: Option<(usize, i32)>,
    out: Option<PathBuf>,
) -> u8 {
    if trials == 0 {
        return fail(&Error::InvalidInput("trials must be at least 1".into()));
    }
    let ids: Vec<Identity> = if target == "all" {
        identities::registry()
    } else {
        match identities::find(target) {
            Some(id) => vec![id],
            None => return fail(&Error::InvalidInput(format!("unknown identity {target:?} (see `ehyper list`)"))),
        }
    };
    let mut jobs = Vec::new();
    for id in &ids {
        let variants: Vec<(usize, i32)> = match nm {
            Some(v) if id.variants.contains(&v) => vec![v],
            Some(_) if target == "all" => Vec::new(),
            Some((n, m)) => {
                return fail(&Error::InvalidInput(format!("{} has no variant (n, m) = ({n}, {m})", id.name)));
            }
            None => id.variants.to_vec(),
        };
        for (n, m) in variants {
            jobs.extend((0..trials).map(|trial| Job { id, n, m, trial }));
        }
    }
    if jobs.is_empty() {
        return fail(&Error::InvalidInput("no identity has the requested variant".into()));
    }
    let cfg = EvalConfig { tol, ..EvalConfig::default() };
    let results: Vec<Result<Vec<IdentityReport>>> =
        jobs.par_iter().map(|j| identities::run_trial(j.id, j.n, j.m, seed, j.trial, &cfg)).collect();

    let mut text = String::new();
    let (mut total, mut failed, mut infeasible) = (0, 0, 0);
    for (job, r) in jobs.iter().zip(&results) {
        match r {
            Ok(reports) => {
                for rep in reports {
                    text.push_str(&report_line(rep));
                    text.push('\n');
                    total += 1;
                    failed += usize::from(!rep.pass);
                }
            }
            Err(e) => {
                infeasible += usize::from(matches!(e, Error::SamplerInfeasible(_)));
                eprintln!("{} trial {}: {e}", job.id.label(job.n, job.m), job.trial);
            }
        }
    }
    let path = out.or_else(|| {
        std::env::var_os(OUT_DIR_VAR).map(|d| Path::new(&d).join(format!("verify-{target}-seed{seed}.jsonl")))
    });
    let written = match &path {
        Some(p) => std::fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write reports: {e}");
        return 1;
    }
    let errors = results.iter().filter(|r| r.is_err()).count();
    eprintln!("{} reports, {failed} failed, {errors} trials without a draw", total);
    if infeasible > 0 {
        3
    } else if failed > 0 || errors > 0 {
        2
    } else {
        0
    }
}

fn cmd_bench((n, m): (usize, i32), seed: u64, rtol: f64) -> u8 {
    if n != 2 || !(0..=1).contains(&m) {
        eprintln!("error: bench compares the two n = 2 paths; use --nm 2,0 or --nm 2,1");
        return 1;
    }
    let id = identities::find("det-direct").expect("registered");
    let mut s = Sampler::new(derived_seed("bench", seed, 0));
    let mut run = || -> Result<String> {
        let d = (id.sample)(&mut s, n, m)?;
        let tp = TypeIParams::new(n, m, d.t, d.base, false)?;
        let t0 = Instant::now();
        let direct = inm_direct(&tp, &spec_with(QuadSpec::tensor(), None, Some(rtol))?)?;
        let t_direct = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let det = inm_det(&tp, &spec_with(QuadSpec::default(), None, Some(rtol))?)?;
        let t_det = t0.elapsed().as_secs_f64();
        let agreement = (direct.value - det.value).norm() / direct.value.norm().max(det.value.norm());
        let ratio = direct.nodes_used as f64 / det.nodes_used as f64;
        Ok(format!(
            "{{\"path\":\"direct\",\"value\":{},\"err_est\":{},\"nodes_used\":{},\"seconds\":{}}}\n\
             {{\"path\":\"det\",\"value\":{},\"cond\":{},\"nodes_used\":{},\"seconds\":{}}}\n\
             {{\"n\":{n},\"m\":{m},\"agreement\":{},\"node_ratio\":{}}}",
            complex(direct.value),
            num(direct.err_est),
            direct.nodes_used,
            num(t_direct),
            complex(det.value),
            num(det.cond),
            det.nodes_used,
            num(t_det),
            num(agreement),
            num(ratio),
        ))
    };
    match run() {
        Ok(table) => {
            println!("{table}");
            0
        }
        Err(e) => fail(&e),
    }
}

fn cmd_report(dir: &Path) -> u8 {
    match summarize_dir(dir) {
        Ok(rows) => {
            print!("{}", summary_table(&rows));
            0
        }
        Err(e) => fail(&e),
    }
}

fn cmd_list() -> u8 {
    for id in identities::registry() {
        let variants = if id.is_plain() {
            String::new()
        } else {
            let v: Vec<String> = id.variants.iter().map(|(n, m)| format!("{n},{m}")).collect();
            format!(" [--nm {}]", v.join(" | "))
        };
        println!("{:<22} {}{variants}", id.name, id.summary);
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let q =
            QuadResult { value: C64::new(0.0, 0.0), err_est: 1.0, nodes_used: 16, converged: false, magnitude: 0.0 };
        assert_eq!(fail(&Error::NotConverged(q)), 2);
        assert_eq!(fail(&Error::SamplerInfeasible("windows".into())), 3);
        assert_eq!(fail(&Error::ContourInvalid("x".into())), 1);
        assert_eq!(fail(&Error::InvalidInput("x".into())), 1);
    }

    #[test]
    fn nm_argument() {
        assert_eq!(parse_nm("2,1"), Ok((2, 1)));
        assert_eq!(parse_nm(" 1 , -1"), Ok((1, -1)));
        assert!(parse_nm("2").is_err());
        assert!(parse_nm("a,1").is_err());
    }

    #[test]
    fn node_cap() {
        let s = spec_with(QuadSpec::default(), Some(32), Some(1e-8)).unwrap();
        assert_eq!((s.n0, s.n_max, s.rel_tol), (32, 32, 1e-8));
        assert!(spec_with(QuadSpec::default(), Some(100), None).is_err());
    }
}
