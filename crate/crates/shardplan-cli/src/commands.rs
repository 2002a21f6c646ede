//! Implementations of the subcommands. Each returns the process exit code
//! on the success path; `Err` means an input error (exit code 1) and is
//! reported by `main`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::json;
use shardplan::access::{structure_from_json, ShareClass, Structure};
use shardplan::ilp::{
    build_ip_avg, build_ip_ramp, build_ip_worst, classify_by_ip, solution_to_map,
    solution_to_ramp_map, solve as solve_program, IlpError, IpObjective, SolveConfig, SolveStatus,
};
use shardplan::maps::{
    construction2_ramp, cumulative_map, ideal_partition, map_from_json, map_to_json,
    modified_cumulative_map, ramp_cumulative_map, rates, AssignmentMap, IdealOutcome,
    LevelStrategy, MapError, RampMode, VerifyReport,
};
use shardplan::scheme::{
    distribute, reconstruct, verify_perfect_scheme, verify_ramp_scheme, EntropyTarget,
    Reconstruction, SchemeError, SchemeReport, ShareBundle,
};

use crate::output::{emit_json, fraction, rate_json, rates_json, rates_line};
use crate::{
    exit, table, ClassifyArgs, CombineArgs, CompareArgs, ConstructArgs, IdealCheckArgs, Method,
    Mode, Objective, SolveArgs, SplitArgs, Strategy, VerifyArgs, NODE_BUDGET_ENV,
};

/// Solver settings: library defaults, with the node budget overridable
/// through the environment.
fn solve_config() -> anyhow::Result<SolveConfig> {
    let mut config = SolveConfig::default();
    if let Ok(raw) = std::env::var(NODE_BUDGET_ENV) {
        config.node_budget = raw
            .trim()
            .parse()
            .with_context(|| format!("{NODE_BUDGET_ENV} must be an integer, got {raw:?}"))?;
    }
    Ok(config)
}

fn load_structure(path: &Path) -> anyhow::Result<(Structure, Option<Vec<String>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    structure_from_json(&text).with_context(|| format!("parsing structure {}", path.display()))
}

fn load_map(path: &Path) -> anyhow::Result<AssignmentMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    map_from_json(&text).with_context(|| format!("parsing map {}", path.display()))
}

/// Participant display names: the document's, or `P1..Pn`.
fn participant_names(n: usize, names: Option<Vec<String>>) -> Vec<String> {
    names.unwrap_or_else(|| (1..=n).map(|i| format!("P{i}")).collect())
}

fn class_name(class: ShareClass) -> &'static str {
    match class {
        ShareClass::Significant => "significant",
        ShareClass::Common => "common",
        ShareClass::Vacuous => "vacuous",
    }
}

/// Did an optimizer-backed construction die of budget exhaustion?
fn exhausted_budget(err: &MapError) -> bool {
    matches!(err, MapError::Optimizer(IlpError::NotOptimal { status: SolveStatus::BudgetExceeded }))
}

/// Prints a solved or constructed map with its rates, optionally writing
/// the map document to a file.
fn emit_map(
    map: &AssignmentMap,
    status: &str,
    objective: Option<i64>,
    out: Option<&Path>,
    json: bool,
) -> anyhow::Result<()> {
    let report = rates(map);
    let text = map_to_json(map);
    if let Some(path) = out {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        let mut value = json!({
            "status": status,
            "t": map.t(),
            "l": map.levels(),
            "m": map.m(),
            "rates": rates_json(&report),
            "map": serde_json::from_str::<serde_json::Value>(&text)?,
        });
        if let Some(objective) = objective {
            value["objective"] = json!(objective);
        }
        emit_json(&value);
    } else {
        println!("status: {status}");
        if let Some(objective) = objective {
            println!("objective: {objective}");
        }
        println!("map: t={} L={} m={}", map.t(), map.levels(), map.m());
        println!("{}", rates_line(&report));
        match out {
            Some(path) => println!("map written to {}", path.display()),
            None => println!("{text}"),
        }
    }
    Ok(())
}

pub(crate) fn solve(args: &SolveArgs, json: bool) -> anyhow::Result<u8> {
    let config = solve_config()?;
    let (structure, _) = load_structure(&args.structure)?;
    let objective = match args.objective {
        Objective::Avg => IpObjective::Average,
        Objective::Worst => IpObjective::Worst,
    };

    let (solution, map) = match &structure {
        Structure::Perfect(s) => {
            let ip = match objective {
                IpObjective::Average => build_ip_avg(s)?,
                IpObjective::Worst => build_ip_worst(s)?,
            };
            let solution = solve_program(&ip, &config);
            let map = solution.is_optimal().then(|| solution_to_map(s, &solution)).transpose()?;
            (solution, map)
        }
        Structure::Ramp(r) => {
            let mode = match args.mode {
                Mode::Exact => RampMode::Exact,
                Mode::Relaxed => RampMode::Relaxed,
            };
            let ip = build_ip_ramp(r, mode, objective)?;
            let solution = solve_program(&ip, &config);
            let map =
                solution.is_optimal().then(|| solution_to_ramp_map(r, &solution)).transpose()?;
            (solution, map)
        }
    };

    match solution.status() {
        SolveStatus::Optimal => {
            let map = map.expect("optimal solutions extract to maps");
            emit_map(&map, "optimal", Some(solution.objective()), args.out.as_deref(), json)?;
            Ok(exit::SUCCESS)
        }
        SolveStatus::Infeasible => {
            if json {
                emit_json(&json!({ "status": "infeasible" }));
            } else {
                println!("status: infeasible");
            }
            Ok(exit::INFEASIBLE)
        }
        SolveStatus::BudgetExceeded => {
            if json {
                emit_json(&json!({
                    "status": "budget-exceeded",
                    "nodes": solution.node_count(),
                }));
            } else {
                println!("status: budget exceeded after {} nodes", solution.node_count());
            }
            Ok(exit::BUDGET)
        }
    }
}

pub(crate) fn construct(args: &ConstructArgs, json: bool) -> anyhow::Result<u8> {
    let (structure, _) = load_structure(&args.structure)?;
    match (&structure, args.method) {
        (Structure::Perfect(s), Method::Cumulative) => {
            emit_map(&cumulative_map(s), "ok", None, args.out.as_deref(), json)?;
            Ok(exit::SUCCESS)
        }
        (Structure::Perfect(s), Method::Modified) => {
            emit_map(&modified_cumulative_map(s)?, "ok", None, args.out.as_deref(), json)?;
            Ok(exit::SUCCESS)
        }
        (Structure::Ramp(r), Method::RampCumulative) => {
            emit_map(&ramp_cumulative_map(r)?, "ok", None, args.out.as_deref(), json)?;
            Ok(exit::SUCCESS)
        }
        (Structure::Ramp(r), Method::Construction2) => {
            let strategy = match args.strategy {
                Strategy::Cumulative => LevelStrategy::Cumulative,
                Strategy::IpAvg => LevelStrategy::IpAverage,
                Strategy::IpWorst => LevelStrategy::IpWorst,
            };
            let recipe = match construction2_ramp(r, strategy, &solve_config()?) {
                Ok(recipe) => recipe,
                Err(err) if exhausted_budget(&err) => {
                    eprintln!("error: {err}");
                    return Ok(exit::BUDGET);
                }
                Err(err) => return Err(err.into()),
            };
            let levels: Vec<serde_json::Value> = recipe
                .levels()
                .iter()
                .map(|level| {
                    Ok(json!({
                        "level": level.level(),
                        "map": serde_json::from_str::<serde_json::Value>(&map_to_json(
                            level.map()
                        ))?,
                    }))
                })
                .collect::<anyhow::Result<_>>()?;
            let value = json!({
                "status": "ok",
                "levels": levels,
                "rates": rates_json(recipe.rates()),
            });
            if let Some(path) = &args.out {
                fs::write(path, serde_json::to_string_pretty(&value)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                emit_json(&value);
            } else {
                println!("status: ok");
                for level in recipe.levels() {
                    println!(
                        "level {}: t={} m={}",
                        level.level(),
                        level.map().t(),
                        level.map().m()
                    );
                }
                println!("{}", rates_line(recipe.rates()));
                if let Some(path) = &args.out {
                    println!("recipe written to {}", path.display());
                }
            }
            Ok(exit::SUCCESS)
        }
        (Structure::Perfect(_), Method::RampCumulative | Method::Construction2) => {
            bail!("this construction needs a ramp structure")
        }
        (Structure::Ramp(_), Method::Cumulative | Method::Modified) => {
            bail!("this construction needs a perfect structure (try ramp-cumulative)")
        }
    }
}

pub(crate) fn compare(args: &CompareArgs, json: bool) -> anyhow::Result<u8> {
    let (structure, _) = load_structure(&args.structure)?;
    let config = solve_config()?;
    let rows = table::comparison_rows(&structure, &config);
    if let Some(path) = &args.csv {
        fs::write(path, table::to_csv(&rows)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        emit_json(&serde_json::to_value(&rows)?);
    } else {
        print!("{}", table::render_table(&rows));
    }
    Ok(exit::SUCCESS)
}

pub(crate) fn split(args: &SplitArgs, json: bool) -> anyhow::Result<u8> {
    let secret =
        fs::read(&args.secret).with_context(|| format!("reading {}", args.secret.display()))?;
    let map = load_map(&args.map)?;
    let mut rng: Box<dyn RngCore> = match args.seed {
        Some(seed) => Box::new(ChaCha12Rng::seed_from_u64(seed)),
        None => Box::new(rand::rngs::OsRng),
    };
    let bundles = distribute(&secret, &map, args.modulus, &mut *rng)?;
    fs::create_dir_all(&args.outdir)
        .with_context(|| format!("creating {}", args.outdir.display()))?;
    let mut written = Vec::with_capacity(bundles.len());
    for bundle in &bundles {
        let path = args.outdir.join(format!("participant_{:02}.splb", bundle.participant() + 1));
        fs::write(&path, bundle.to_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    if json {
        emit_json(&json!({
            "participants": written.len(),
            "t": map.t(),
            "l": map.levels(),
            "m": map.m(),
            "written": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        }));
    } else {
        println!(
            "split {} bytes into {} bundles (t={}, L={}, m={})",
            secret.len(),
            written.len(),
            map.t(),
            map.levels(),
            map.m()
        );
        for path in &written {
            println!("  {}", path.display());
        }
    }
    Ok(exit::SUCCESS)
}

pub(crate) fn combine(args: &CombineArgs, json: bool) -> anyhow::Result<u8> {
    let map = load_map(&args.map)?;
    let mut bundles = Vec::with_capacity(args.bundles.len());
    for path in &args.bundles {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        bundles.push(
            ShareBundle::from_bytes(&bytes)
                .with_context(|| format!("decoding {}", path.display()))?,
        );
    }
    match reconstruct(&bundles, &map) {
        Ok(Reconstruction::Secret(secret)) => {
            match &args.out {
                Some(path) => {
                    fs::write(path, &secret)
                        .with_context(|| format!("writing {}", path.display()))?;
                    if json {
                        emit_json(&json!({
                            "status": "recovered",
                            "bytes": secret.len(),
                            "out": path.display().to_string(),
                        }));
                    } else {
                        println!("recovered {} bytes to {}", secret.len(), path.display());
                    }
                }
                None => {
                    if json {
                        emit_json(&json!({
                            "status": "recovered",
                            "bytes": secret.len(),
                            "hex": secret.iter().map(|b| format!("{b:02x}")).collect::<String>(),
                        }));
                    } else {
                        std::io::stdout().write_all(&secret).context("writing secret")?;
                    }
                }
            }
            Ok(exit::SUCCESS)
        }
        Ok(Reconstruction::Refusal { held, needed }) => {
            if json {
                emit_json(&json!({ "status": "refused", "held": held, "needed": needed }));
            } else {
                eprintln!("refused: coalition holds {held} of the {needed} required primitives");
            }
            Ok(exit::VERIFY)
        }
        // Bundles that are well-formed but fail to verify against this map
        // (wrong digest, wrong shares, conflicting pools) are a
        // verification failure, not an input error.
        Err(err @ (SchemeError::BadBundle { .. } | SchemeError::InconsistentBundles { .. })) => {
            if json {
                emit_json(&json!({ "status": "rejected", "reason": err.to_string() }));
            } else {
                eprintln!("rejected: {err}");
            }
            Ok(exit::VERIFY)
        }
        Err(err) => Err(err.into()),
    }
}

/// Renders the combinatorial layer of a verification report.
fn emit_combinatorial(report: &VerifyReport, json_lines: &mut Vec<serde_json::Value>, json: bool) {
    for violation in report.violations() {
        if json {
            json_lines.push(json!(violation.to_string()));
        } else {
            println!("  violation: {violation}");
        }
    }
}

/// Renders a full scheme report; returns whether everything passed.
fn emit_scheme_report(report: &SchemeReport, json: bool) -> bool {
    let mut violations = Vec::new();
    if !json {
        println!(
            "combinatorial: {}",
            if report.combinatorial().passed() { "pass" } else { "FAIL" }
        );
    }
    emit_combinatorial(report.combinatorial(), &mut violations, json);

    let entropy_value = match report.entropy() {
        None => {
            if !json {
                println!("oracle: skipped (state space exceeds the budget)");
            }
            serde_json::Value::Null
        }
        Some(entropy) => {
            if !json {
                println!(
                    "oracle: GF({}), {} coalition(s): {}",
                    entropy.modulus(),
                    entropy.checks().len(),
                    if entropy.passed() { "pass" } else { "FAIL" }
                );
            }
            let mut checks = Vec::new();
            for check in entropy.checks() {
                let (kind, target) = match check.target() {
                    EntropyTarget::Exactly(r) => ("exactly", r),
                    EntropyTarget::AtLeast(r) => ("at-least", r),
                };
                if json {
                    checks.push(json!({
                        "set": check.set().to_string(),
                        "level": check.level(),
                        "target": { "kind": kind, "ratio": rate_json(target) },
                        "measured": rate_json(check.measured()),
                        "passed": check.passed(),
                    }));
                } else if !check.passed() {
                    println!(
                        "  oracle violation: {} at level {} measured {}, wanted {kind} {}",
                        check.set(),
                        check.level(),
                        fraction(check.measured()),
                        fraction(target),
                    );
                }
            }
            json!({
                "modulus": entropy.modulus(),
                "checks": checks,
            })
        }
    };

    if json {
        emit_json(&json!({
            "passed": report.passed(),
            "violations": violations,
            "entropy": entropy_value,
        }));
    } else {
        println!("result: {}", if report.passed() { "pass" } else { "FAIL" });
    }
    report.passed()
}

pub(crate) fn verify(args: &VerifyArgs, json: bool) -> anyhow::Result<u8> {
    let map = load_map(&args.map)?;
    let (structure, _) = load_structure(&args.structure)?;
    let mode = match args.mode {
        Mode::Exact => RampMode::Exact,
        Mode::Relaxed => RampMode::Relaxed,
    };

    let passed = if args.oracle {
        let report = match &structure {
            Structure::Perfect(s) => verify_perfect_scheme(&map, s, args.oracle_budget),
            Structure::Ramp(r) => verify_ramp_scheme(&map, r, mode, args.oracle_budget)?,
        };
        emit_scheme_report(&report, json)
    } else {
        let report = match &structure {
            Structure::Perfect(s) => shardplan::maps::verify_perfect(&map, s),
            Structure::Ramp(r) => shardplan::maps::verify_ramp(&map, r, mode)?,
        };
        let mut violations = Vec::new();
        if !json {
            println!("combinatorial: {}", if report.passed() { "pass" } else { "FAIL" });
        }
        emit_combinatorial(&report, &mut violations, json);
        if json {
            emit_json(&json!({ "passed": report.passed(), "violations": violations }));
        }
        report.passed()
    };
    Ok(if passed { exit::SUCCESS } else { exit::VERIFY })
}

pub(crate) fn classify(args: &ClassifyArgs, json: bool) -> anyhow::Result<u8> {
    let (structure, names) = load_structure(&args.structure)?;
    let classes = match &structure {
        Structure::Perfect(s) => {
            let from_sets = s.classify_participants()?;
            // The optimizer-backed classifier must agree; disagreement
            // would mean one of the two routes is wrong.
            let from_ip = match classify_by_ip(s, &solve_config()?) {
                Ok(classes) => classes,
                Err(IlpError::NotOptimal { status: SolveStatus::BudgetExceeded }) => {
                    eprintln!("error: node budget exhausted while classifying");
                    return Ok(exit::BUDGET);
                }
                Err(err) => return Err(err.into()),
            };
            if from_sets != from_ip {
                bail!("internal error: set-based and optimizer-based classifications disagree");
            }
            from_sets
        }
        Structure::Ramp(r) => r.classify_participants()?,
    };
    let names = participant_names(structure.n(), names);
    if json {
        let items: Vec<serde_json::Value> = classes
            .iter()
            .zip(&names)
            .enumerate()
            .map(|(i, (&class, name))| {
                json!({ "participant": i, "name": name, "class": class_name(class) })
            })
            .collect();
        emit_json(&serde_json::Value::Array(items));
    } else {
        for (name, &class) in names.iter().zip(&classes) {
            println!("{name}: {}", class_name(class));
        }
    }
    Ok(exit::SUCCESS)
}

pub(crate) fn ideal_check(args: &IdealCheckArgs, json: bool) -> anyhow::Result<u8> {
    let (structure, names) = load_structure(&args.structure)?;
    let Structure::Perfect(s) = &structure else {
        bail!("the ideal check applies to perfect structures")
    };
    let names = participant_names(s.n(), names);
    match ideal_partition(s, &solve_config()?) {
        Ok(IdealOutcome::Ideal { partition, t }) => {
            if json {
                emit_json(&json!({
                    "ideal": true,
                    "t": t,
                    "partition": partition
                        .iter()
                        .map(|block| block.indices())
                        .collect::<Vec<_>>(),
                }));
            } else {
                println!("ideal: any {t} of {} blocks recover the secret", partition.len());
                for (i, block) in partition.iter().enumerate() {
                    let members: Vec<&str> = block.iter().map(|p| names[p].as_str()).collect();
                    println!("  block {}: {}", i + 1, members.join(", "));
                }
            }
            Ok(exit::SUCCESS)
        }
        Ok(IdealOutcome::NotIdeal { worst }) => {
            if json {
                emit_json(&json!({ "ideal": false, "worst": rate_json(worst) }));
            } else {
                println!("not ideal: the minimal worst coding rate is {}", fraction(worst));
            }
            Ok(exit::SUCCESS)
        }
        Err(err) if exhausted_budget(&err) => {
            eprintln!("error: {err}");
            Ok(exit::BUDGET)
        }
        Err(err) => Err(err.into()),
    }
}
