//! Command-line surface: catalog listing, axiom verification, bracket and
//! Hamiltonian-field computation, trajectory integration, symmetry checks,
//! and the full report sweep.
//!
//! Exit codes: 0 success, 1 mathematical failure, 2 usage/input error,
//! 3 runtime domain fault.

use clap::{Args, Parser, Subcommand};
use jacobi_core::catalog::{
    check_entry_examples, default_param_draws, instantiate, load_catalog, Catalog, CatalogEntry,
};
use jacobi_core::expr::is_zero;
use jacobi_core::jacobi::{
    hamiltonian_vf, jacobi_bracket, symmetry_field, verify_jacobi_named, JacobiStructure,
};
use jacobi_core::liesys::{check_invariant_along, integrate, LieSystemSpec};
use jacobi_core::{Error, Expression};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_MATH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FAULT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "jacobi",
    about = "Symbolic-numeric engine for Jacobi structures on coordinate charts",
    version
)]
struct Cli {
    /// Catalog file (default: embedded; env JACOBI_CATALOG overrides)
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Sample count for probabilistic identity tests
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Relative tolerance for identity tests
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// RNG seed (echoed in every report)
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output format
    #[arg(long, global = true, default_value = "text")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EntryArgs {
    /// Catalog entry id, e.g. T2:III-IIIiv
    #[arg(long)]
    entry: String,
    /// Parameter values as name=value (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries with labels and parameter slots
    List,
    /// Verify the structure axioms for one entry or the whole catalog
    Verify {
        #[arg(long)]
        entry: Option<String>,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Sweep every entry at default parameter draws
        #[arg(long)]
        all: bool,
    },
    /// Kirillov bracket of two functions on an entry's structure
    Bracket {
        #[command(flatten)]
        entry: EntryArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Expected result; sets the exit code from an is_zero comparison
        #[arg(long)]
        expect: Option<String>,
    },
    /// Hamiltonian vector field of a function
    Hamvf {
        #[command(flatten)]
        entry: EntryArgs,
        #[arg(long)]
        f: String,
    },
    /// Integrate a time-dependent system built from an entry's example
    Integrate {
        #[command(flatten)]
        entry: EntryArgs,
        /// Example system name (default: the entry's sole/first system)
        #[arg(long)]
        system: Option<String>,
        /// Comma-separated time coefficients b_i(t), e.g. "sin(t),1"
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Comma-separated initial point, coordinate order
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        dt: f64,
        /// Expression monitored for drift along the trajectory
        #[arg(long)]
        invariant: Option<String>,
        /// Trajectory output file (CSV unless --format json)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Symmetry field of a constant of motion, checked against generators
    Symmetry {
        #[command(flatten)]
        entry: EntryArgs,
        #[arg(long)]
        h: String,
        /// Example system whose generators are tested for commutation
        /// (defaults to the system that carries an invariant)
        #[arg(long)]
        system: Option<String>,
    },
    /// Full sweep: axioms plus example pipelines for every entry
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Domain(_) | Error::BadBox(_) => EXIT_FAULT,
                Error::Io(_) => EXIT_FAULT,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn catalog_path(cli: &Cli) -> Option<PathBuf> {
    cli.catalog
        .clone()
        .or_else(|| std::env::var_os("JACOBI_CATALOG").map(PathBuf::from))
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, Error> {
    let mut m = BTreeMap::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected NAME=VALUE, got `{p}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Parameter(format!("`{v}` is not a number in `{p}`")))?;
        m.insert(k.trim().to_string(), v);
    }
    Ok(m)
}

fn find_entry<'a>(cat: &'a Catalog, id: &str) -> Result<&'a CatalogEntry, Error> {
    cat.get(id)
        .ok_or_else(|| Error::Catalog(format!("unknown entry id `{id}`")))
}

/// Instantiate an entry, filling unspecified parameters from the primary
/// default draw.
fn instantiate_with_defaults(
    entry: &CatalogEntry,
    given: &BTreeMap<String, f64>,
) -> Result<(JacobiStructure, BTreeMap<String, f64>), Error> {
    let mut params = default_param_draws(entry).into_iter().next().unwrap_or_default();
    for (k, v) in given {
        params.insert(k.clone(), *v);
    }
    params.retain(|k, _| entry.params.iter().any(|p| &p.name == k) || given.contains_key(k));
    let j = instantiate(entry, &params)?;
    Ok((j, params))
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let json_mode = cli.format == "json";
    let cat = load_catalog(catalog_path(cli).as_deref())?;
    match &cli.command {
        Command::List => {
            if json_mode {
                let items: Vec<_> = cat
                    .entries
                    .iter()
                    .map(|e| {
                        json!({
                            "id": e.id,
                            "label": e.label,
                            "params": e.params.iter().map(|p| &p.name).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&items).unwrap());
            } else {
                for e in &cat.entries {
                    let ps = e
                        .params
                        .iter()
                        .map(|p| p.name.as_str())
                        .collect::<Vec<_>>()
                        .join(",");
                    let ptxt = if ps.is_empty() {
                        String::new()
                    } else {
                        format!("  params: {ps}")
                    };
                    println!("{}  {}{}", e.id, e.label, ptxt);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { entry, params, all } => cmd_verify(cli, &cat, entry.as_deref(), params, *all),
        Command::Bracket { entry, f, g, expect } => cmd_bracket(cli, &cat, entry, f, g, expect.as_deref()),
        Command::Hamvf { entry, f } => {
            let ent = find_entry(&cat, &entry.entry)?;
            let (j, params) = instantiate_with_defaults(ent, &parse_params(&entry.params)?)?;
            let fe = j.parse(f)?;
            let x = hamiltonian_vf(&j, &fe)?;
            if json_mode {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "entry": ent.id, "params": params, "f": f,
                        "field": x.to_string_map(), "seed": cli.seed,
                    }))
                    .unwrap()
                );
            } else {
                println!("X_f = {}", x.pretty());
            }
            Ok(EXIT_OK)
        }
        Command::Integrate {
            entry,
            system,
            b,
            x0,
            t0,
            t1,
            dt,
            invariant,
            output,
        } => cmd_integrate(cli, &cat, entry, system.as_deref(), b, x0, *t0, *t1, *dt, invariant.as_deref(), output.as_deref()),
        Command::Symmetry { entry, h, system } => {
            cmd_symmetry(cli, &cat, entry, h, system.as_deref())
        }
        Command::Report => cmd_report(cli, &cat),
    }
}

fn cmd_verify(
    cli: &Cli,
    cat: &Catalog,
    entry: Option<&str>,
    params: &[String],
    all: bool,
) -> Result<u8, Error> {
    let json_mode = cli.format == "json";
    if all {
        let reports = jacobi_core::catalog::verify_all(cat, cli.samples, cli.tol, cli.seed);
        let ok = reports
            .iter()
            .all(|r| r.expectation_met && !r.implementation_disagreement);
        if json_mode {
            println!("{}", serde_json::to_string_pretty(&reports).unwrap());
        } else {
            for r in &reports {
                let status = if r.paper_discrepancy {
                    if r.expectation_met { "flagged-fail (expected)" } else { "UNEXPECTED PASS" }
                } else if r.expectation_met {
                    "pass"
                } else {
                    "FAIL"
                };
                println!("{:<18} {}", r.id, status);
            }
            println!(
                "{} entries, expectations met: {}, seed {}",
                reports.len(),
                ok,
                cli.seed
            );
        }
        return Ok(if ok { EXIT_OK } else { EXIT_MATH });
    }
    let id = entry.ok_or_else(|| Error::Parameter("verify needs --entry or --all".into()))?;
    let ent = find_entry(cat, id)?;
    let (j, used) = instantiate_with_defaults(ent, &parse_params(params)?)?;
    let report = verify_jacobi_named(&j, &ent.id, cli.samples, cli.tol, cli.seed)?;
    if json_mode {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "params": used,
                "paper_discrepancy": ent.paper_discrepancy,
                "records": report.to_records(),
            }))
            .unwrap()
        );
    } else {
        for a in &report.axioms {
            println!(
                "{}  {:<12} {}  max_residual {:.3e}",
                ent.id,
                a.axiom,
                if a.verdict { "pass" } else { "FAIL" },
                a.max_residual
            );
        }
        println!("seed {}  samples {}  tol {:.1e}", cli.seed, cli.samples, cli.tol);
    }
    if report.passed || ent.paper_discrepancy {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_MATH)
    }
}

fn cmd_bracket(
    cli: &Cli,
    cat: &Catalog,
    entry: &EntryArgs,
    f: &str,
    g: &str,
    expect: Option<&str>,
) -> Result<u8, Error> {
    let ent = find_entry(cat, &entry.entry)?;
    let (j, params) = instantiate_with_defaults(ent, &parse_params(&entry.params)?)?;
    let fe = j.parse(f)?;
    let ge = j.parse(g)?;
    let br = jacobi_bracket(&j, &fe, &ge)?;
    let mut code = EXIT_OK;
    let mut residual = None;
    if let Some(want) = expect {
        let we = j.parse(want)?;
        let t = is_zero(
            &Expression::sub(br.clone(), we),
            &j.sampling_box,
            cli.samples,
            cli.tol,
            cli.seed,
        )?;
        residual = Some(t.max_residual);
        if !t.is_zero {
            code = EXIT_MATH;
        }
    }
    if cli.format == "json" {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "entry": ent.id, "params": params,
                "f": f, "g": g, "bracket": br.render(),
                "expect": expect, "matched": code == EXIT_OK,
                "max_residual": residual, "seed": cli.seed,
            }))
            .unwrap()
        );
    } else {
        println!("{{f,g}} = {}", br.render());
        if let Some(r) = residual {
            println!(
                "expectation {}  max_residual {r:.3e}",
                if code == EXIT_OK { "matched" } else { "FAILED" }
            );
        }
    }
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_integrate(
    cli: &Cli,
    cat: &Catalog,
    entry: &EntryArgs,
    system: Option<&str>,
    b: &str,
    x0: &str,
    t0: f64,
    t1: f64,
    dt: f64,
    invariant: Option<&str>,
    output: Option<&std::path::Path>,
) -> Result<u8, Error> {
    if dt <= 0.0 {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let ent = find_entry(cat, &entry.entry)?;
    let (j, params) = instantiate_with_defaults(ent, &parse_params(&entry.params)?)?;
    let sys = match system {
        Some(name) => ent
            .systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Catalog(format!("{}: no example system `{name}`", ent.id)))?,
        None => ent.systems.first().ok_or_else(|| {
            Error::Catalog(format!("{}: entry has no example systems", ent.id))
        })?,
    };
    let generators = sys
        .hamiltonians
        .iter()
        .map(|fi| hamiltonian_vf(&j, fi))
        .collect::<Result<Vec<_>, _>>()?;
    let coeffs = b
        .split(',')
        .map(LieSystemSpec::parse_coefficient)
        .collect::<Result<Vec<_>, _>>()?;
    let spec = LieSystemSpec::new(&ent.chart, generators, coeffs)?.with_params(params.clone());
    let x0v: Vec<f64> = x0
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad x0 component `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let traj = integrate(&spec, &x0v, t0, t1, dt)?;
    let payload = if cli.format == "json" {
        traj.to_json()
    } else {
        traj.to_csv()
    };
    match output {
        Some(p) => std::fs::write(p, payload)?,
        None => print!("{payload}"),
    }
    if let Some(fault_t) = traj.fault_at {
        eprintln!("domain fault at t = {fault_t}; trajectory truncated");
        return Ok(EXIT_FAULT);
    }
    if let Some(hs) = invariant {
        let h = j.parse(hs)?;
        let d = check_invariant_along(&traj, &h, &params, cli.tol.max(1e-6))?;
        eprintln!("invariant max drift {:.3e}", d.max_drift);
        if !d.ok {
            return Ok(EXIT_MATH);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_symmetry(
    cli: &Cli,
    cat: &Catalog,
    entry: &EntryArgs,
    h: &str,
    system: Option<&str>,
) -> Result<u8, Error> {
    let ent = find_entry(cat, &entry.entry)?;
    if ent.systems.is_empty() {
        return Err(Error::Catalog(format!(
            "{}: entry has no example generators",
            ent.id
        )));
    }
    let sys = match system {
        Some(name) => ent
            .systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Catalog(format!("{}: no system `{name}`", ent.id)))?,
        None => ent
            .systems
            .iter()
            .find(|s| s.invariant.is_some())
            .unwrap_or(&ent.systems[0]),
    };
    let (j, params) = instantiate_with_defaults(ent, &parse_params(&entry.params)?)?;
    let he = j.parse(h)?;
    let xh = symmetry_field(&j, &he)?;
    let mut gens = Vec::new();
    for f in &sys.hamiltonians {
        gens.push(hamiltonian_vf(&j, f)?);
    }
    let t = jacobi_core::jacobi::check_lie_symmetry(
        &xh,
        &gens,
        &j.sampling_box,
        cli.samples,
        cli.tol,
        cli.seed,
    )?;
    if cli.format == "json" {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "entry": ent.id, "params": params, "h": h,
                "X_h": xh.to_string_map(),
                "commutes": t.is_zero, "max_residual": t.max_residual,
                "seed": cli.seed,
            }))
            .unwrap()
        );
    } else {
        println!("X_h = {}", xh.pretty());
        println!(
            "commutation with {} generators: {}  max_residual {:.3e}",
            gens.len(),
            if t.is_zero { "pass" } else { "FAIL" },
            t.max_residual
        );
    }
    Ok(if t.is_zero { EXIT_OK } else { EXIT_MATH })
}

fn cmd_report(cli: &Cli, cat: &Catalog) -> Result<u8, Error> {
    let json_mode = cli.format == "json";
    let sweep = jacobi_core::catalog::verify_all(cat, cli.samples, cli.tol, cli.seed);
    let mut all_ok = true;
    let mut example_checks = Vec::new();
    for ent in &cat.entries {
        if ent.systems.is_empty() || ent.paper_discrepancy {
            continue;
        }
        let draw = default_param_draws(ent).into_iter().next().unwrap_or_default();
        let j = instantiate(ent, &draw)?;
        verify_jacobi_named(&j, &ent.id, cli.samples, cli.tol, cli.seed)?;
        let checks = check_entry_examples(ent, &j, cli.samples, cli.tol, cli.seed)?;
        example_checks.extend(checks);
    }
    for r in &sweep {
        all_ok &= r.expectation_met && !r.implementation_disagreement;
    }
    for c in &example_checks {
        all_ok &= c.ok();
    }
    if json_mode {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "axioms": sweep,
                "examples": example_checks,
                "seed": cli.seed,
            }))
            .unwrap()
        );
    } else {
        for r in &sweep {
            println!(
                "axioms  {:<18} {}",
                r.id,
                if r.expectation_met { "as-expected" } else { "UNEXPECTED" }
            );
        }
        for c in &example_checks {
            println!(
                "example {:<18} {:<10} {:<22} {}",
                c.entry,
                c.system,
                c.check,
                if c.ok() {
                    if c.expected_mismatch { "mismatch (flagged)" } else { "pass" }
                } else {
                    "FAIL"
                }
            );
        }
        println!("overall: {}  seed {}", if all_ok { "pass" } else { "FAIL" }, cli.seed);
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_MATH })
}
