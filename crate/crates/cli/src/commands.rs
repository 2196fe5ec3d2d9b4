use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use clsk::bench::{
    append_ber_csv, ber_svg, centroid_boundary_test, load_ber_csv, pending_cells, run_cells, spectrogram,
    spectrogram_svg, BaselineSpec, BitSchedule, Scale, ScheduleChoice, Scheme, SweepConfig, SweepSpec,
};
use clsk::dynsys::{example_gamma, msf_sweep, LyapunovOptions, MsfCurve, NodeModel};
use clsk::modem::{reference_matrix, transmit, DetectionFrame, ObservedTraces, TransmitSettings};
use clsk::rng::derive_seed;
use clsk::topology::{
    alpha_thresholds, block_diagonalize, epsilon_range, example1, example2, validate_topology, AlphaThresholds, Design,
    NetworkDesign, ValidationReport,
};

use crate::manifest::RunManifest;
use crate::{
    exit, BerArgs, Cli, Command, DesignCheckArgs, Failure, MsfArgs, PresetArgs, PresetName, SchemeArg, SpectrogramArgs,
    TableArg, TransmitArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    if let Command::Preset(a) = &cli.command {
        return preset(a);
    }
    let out = &cli.global.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let name = match &cli.command {
        Command::Msf(_) => "msf",
        Command::DesignCheck(_) => "design-check",
        Command::Transmit(_) => "transmit",
        Command::Ber(_) => "ber",
        Command::Spectrogram(_) => "spectrogram",
        Command::Preset(_) => unreachable!(),
    };
    let mut m = RunManifest::new(name, out);
    // The manifest is written even when the command fails part way.
    let result = match &cli.command {
        Command::Msf(a) => msf(cli, a, &mut m),
        Command::DesignCheck(a) => design_check(cli, a, &mut m),
        Command::Transmit(a) => transmit_cmd(cli, a, &mut m),
        Command::Ber(a) => ber(cli, a, &mut m),
        Command::Spectrogram(a) => spectrogram_cmd(cli, a, &mut m),
        Command::Preset(_) => unreachable!(),
    };
    m.write()?;
    result
}

fn preset(a: &PresetArgs) -> Result<()> {
    let d = match a.name {
        PresetName::Example1 => example1(),
        PresetName::Example2 => example2(),
    };
    print!("{}", d.to_toml_string()?);
    Ok(())
}

fn load_design(cli: &Cli, m: &mut RunManifest) -> Result<Design> {
    let file = match &cli.global.config {
        Some(p) => {
            let nd = NetworkDesign::load(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            m.input(p)?;
            m.config = Some(p.clone());
            nd
        }
        None => example1(),
    };
    Ok(file.to_design()?)
}

fn write_json<T: Serialize>(m: &mut RunManifest, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(m.out_dir.join(name), text + "\n")?;
    m.output(name)
}

fn create(m: &RunManifest, name: &str) -> Result<BufWriter<File>> {
    let p = m.out_dir.join(name);
    Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
}

fn msf_grid(a: &MsfArgs) -> Result<Vec<f64>> {
    if !(a.eta_step > 0.0) || !a.eta_min.is_finite() || !a.eta_max.is_finite() || a.eta_max < a.eta_min {
        return Err(Failure::usage(format!(
            "empty eta grid: min {}, max {}, step {}",
            a.eta_min, a.eta_max, a.eta_step
        )));
    }
    let n = ((a.eta_max - a.eta_min) / a.eta_step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| a.eta_min + k as f64 * a.eta_step).collect())
}

fn compute_msf(grid: &[f64], opts: &LyapunovOptions) -> Result<MsfCurve> {
    Ok(msf_sweep(&NodeModel::chen(), &example_gamma(), grid, opts)?)
}

fn msf(cli: &Cli, a: &MsfArgs, m: &mut RunManifest) -> Result<()> {
    let grid = msf_grid(a)?;
    let opts = LyapunovOptions {
        dt: a.dt,
        transient: a.transient,
        horizon: a.horizon,
        seed: cli.global.seed.unwrap_or(0),
        ..Default::default()
    };
    m.seed = Some(opts.seed);
    let curve = compute_msf(&grid, &opts)?;
    let mut w = create(m, "msf.csv")?;
    writeln!(w, "eta,mu")?;
    for (eta, mu) in &curve.samples {
        writeln!(w, "{eta},{mu}")?;
    }
    w.flush()?;
    drop(w);
    m.output("msf.csv")?;
    write_json(m, "msf.json", &json!({ "options": opts, "curve": curve }))?;
    println!("eta_bar = {} (zero crossing {:.4})", curve.threshold, curve.crossing);
    Ok(())
}

#[derive(Serialize)]
struct SymbolReport {
    bit: u8,
    pattern: Vec<Vec<usize>>,
    validation: ValidationReport,
    spectral: Option<SpectralReport>,
}

#[derive(Serialize)]
struct SpectralReport {
    lambda_min: f64,
    lambda_s2: Option<f64>,
    transverse_eigenvalues: Vec<f64>,
    sync_eigenvalues: Vec<f64>,
    eigenvalue_condition: bool,
    epsilon_range: Option<(f64, f64)>,
    epsilon_in_range: bool,
    alpha_thresholds: Option<AlphaThresholds>,
    alpha_regime: Option<clsk::topology::AlphaRegime>,
}

fn spectral_report(d: &Design, s: usize, eta_bar: f64) -> Result<Option<SpectralReport>> {
    let sym = &d.symbols[s];
    let Some(delta) = &sym.symmetry else { return Ok(None) };
    let split = block_diagonalize(&sym.xi, delta, &sym.pattern)?;
    let range = epsilon_range(eta_bar, &split).ok();
    let thresholds = if d.l > 0 { Some(alpha_thresholds(eta_bar, d.epsilon, split.lambda_min)?) } else { None };
    Ok(Some(SpectralReport {
        lambda_min: split.lambda_min,
        lambda_s2: split.lambda_s2(),
        transverse_eigenvalues: split.transverse_eigenvalues(),
        sync_eigenvalues: split.sync_eigenvalues.clone(),
        eigenvalue_condition: clsk::topology::check_eigenvalue_condition(&split),
        epsilon_in_range: range.is_some_and(|(lo, hi)| (lo..=hi).contains(&d.epsilon)),
        epsilon_range: range,
        alpha_regime: thresholds.map(|t| t.regime(d.alpha)),
        alpha_thresholds: thresholds,
    }))
}

fn design_check(cli: &Cli, a: &DesignCheckArgs, m: &mut RunManifest) -> Result<()> {
    let d = load_design(cli, m)?;
    let eta_bar = match a.eta_bar {
        Some(v) => v,
        None => {
            let grid: Vec<f64> = (0..=40).map(|k| -20.0 + 0.5 * k as f64).collect();
            let opts = LyapunovOptions { horizon: a.horizon, seed: cli.global.seed.unwrap_or(0), ..Default::default() };
            m.seed = Some(opts.seed);
            compute_msf(&grid, &opts)?.threshold
        }
    };
    let requirements = d.requirements();
    let mut symbols = Vec::new();
    let mut passed = requirements.passed();
    println!("eta_bar = {eta_bar}, epsilon = {}, alpha = {}", d.epsilon, d.alpha);
    for (s, sym) in d.symbols.iter().enumerate() {
        let validation = validate_topology(&d.topology(s));
        let spectral = spectral_report(&d, s, eta_bar)?;
        passed &= validation.passed();
        println!("symbol for bit {}: pattern {:?}", sym.bit, sym.pattern.to_one_based());
        for c in &validation.checks {
            println!("  [{}] {}{}", mark(c.passed), c.name, detail(&c.detail));
        }
        match &spectral {
            Some(r) => {
                passed &= r.eigenvalue_condition && r.epsilon_in_range;
                println!(
                    "  [{}] |lambda_s2| < lambda_min: lambda_min {:.4}, lambda_s2 {}",
                    mark(r.eigenvalue_condition),
                    r.lambda_min,
                    r.lambda_s2.map_or("none".into(), |v| format!("{v:.4}"))
                );
                match r.epsilon_range {
                    Some((lo, hi)) => {
                        println!("  [{}] epsilon {} in [{lo:.4}, {hi:.4}]", mark(r.epsilon_in_range), d.epsilon)
                    }
                    None => println!("  [FAIL] no admissible epsilon range"),
                }
                if let (Some(t), Some(reg)) = (r.alpha_thresholds, r.alpha_regime) {
                    println!("  alpha1 {:.4}, alpha2 {:.4}: alpha {} is {reg:?}", t.alpha1, t.alpha2, d.alpha);
                }
            }
            None => println!("  spectral split skipped: no symmetry given"),
        }
        symbols.push(SymbolReport { bit: sym.bit, pattern: sym.pattern.to_one_based(), validation, spectral });
    }
    println!("requirements:");
    for c in &requirements.checks {
        println!("  [{}] {}: {}{}", mark(c.passed), c.id, c.description, detail(&c.detail));
    }
    let one_based: Vec<[usize; 2]> = requirements.channel_links.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
    println!("channel links: {one_based:?}");
    write_json(
        m,
        "design_report.json",
        &json!({
            "passed": passed,
            "eta_bar": eta_bar,
            "epsilon": d.epsilon,
            "alpha": d.alpha,
            "symbols": symbols,
            "requirements": requirements,
            "channel_links": one_based,
        }),
    )?;
    if passed {
        println!("design OK");
        Ok(())
    } else {
        Err(Failure { code: exit::DESIGN, message: "design check failed".into() }.into())
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn detail(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" ({s})")
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    let bits: Option<Vec<u8>> = s
        .chars()
        .filter(|c| !matches!(c, ',' | '_' | ' '))
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect();
    match bits {
        Some(b) if !b.is_empty() => Ok(b),
        _ => Err(Failure::usage(format!("bits must be a non-empty string of 0 and 1, got '{s}'"))),
    }
}

fn transmit_cmd(cli: &Cli, a: &TransmitArgs, m: &mut RunManifest) -> Result<()> {
    let mut d = load_design(cli, m)?;
    if let Some(e) = a.epsilon {
        d = d.with_epsilon(e);
    }
    if let Some(al) = a.alpha {
        d = d.with_alpha(al);
    }
    if let Some(sf) = a.sf {
        d.simulation.spreading_factor = sf;
    }
    let seed = cli.global.seed.unwrap_or(0);
    m.seed = Some(seed);
    let bits = match (&a.bits, a.random) {
        (Some(s), _) => parse_bits(s)?,
        (None, Some(n)) if n > 0 => (0..n).map(|i| (derive_seed(seed, &[u64::MAX, i as u64]) & 1) as u8).collect(),
        _ => return Err(Failure::usage("--random needs a positive bit count")),
    };
    let settings = TransmitSettings { sigma: a.sigma, seed, scheme: a.sde.into(), ..Default::default() };
    let tx = transmit(&bits, &d, &settings)?;
    let receiver = d.receiver_nodes();
    let refs = d.symbols.iter().map(|s| reference_matrix(&s.pattern, &receiver)).collect::<clsk::Result<Vec<_>>>()?;
    let frames = tx.detect(&refs)?;

    tx.channel.write_csv(create(m, "channel.csv")?)?;
    m.output("channel.csv")?;
    tx.receiver.write_csv(create(m, "receiver.csv")?)?;
    m.output("receiver.csv")?;
    DetectionFrame::write_jsonl(&frames, create(m, "frames.jsonl")?)?;
    m.output("frames.jsonl")?;

    let detected: Vec<u8> = frames.iter().map(|f| d.symbols[f.symbol].bit).collect();
    let errors = bits.iter().zip(&detected).filter(|(a, b)| a != b).count();
    let one_based = |v: &[(usize, usize)]| v.iter().map(|&(i, j)| [i + 1, j + 1]).collect::<Vec<_>>();
    write_json(
        m,
        "transmission.json",
        &json!({
            "bits": bits,
            "detected": detected,
            "errors": errors,
            "settings": settings,
            "epsilon": d.epsilon,
            "alpha": d.alpha,
            "spreading_factor": tx.spreading_factor,
            "symbol_duration": tx.symbol_duration,
            "detector": tx.rule,
            "schedule": tx.schedule,
            "channel_links": one_based(&tx.channel_links),
            "receiver_nodes": receiver.iter().map(|i| i + 1).collect::<Vec<_>>(),
        }),
    )?;
    let show = |v: &[u8]| v.iter().map(|b| char::from(b'0' + b)).collect::<String>();
    println!("sent     {}", show(&bits));
    println!("detected {}", show(&detected));
    println!("{errors} of {} bits in error", bits.len());
    Ok(())
}

fn sweep_config(cli: &Cli, a: &BerArgs, d: Design, m: &mut RunManifest) -> Result<SweepConfig> {
    let mut cfg = if let Some(p) = &a.sweep {
        let text = fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
        let spec: SweepSpec = toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
        m.input(p)?;
        SweepConfig::from_spec(d, &spec)?
    } else {
        let wants_clsk = a.scheme.is_empty() || a.scheme.contains(&SchemeArg::Clsk);
        if wants_clsk && a.sigma.is_empty() {
            return Err(Failure::usage("give --sigma values or a --sweep file"));
        }
        let wants_baseline = a.scheme.iter().any(|s| *s != SchemeArg::Clsk);
        if wants_baseline && a.ebn0.is_empty() {
            return Err(Failure::usage("CSK and DCSK cells need --ebn0 values"));
        }
        let schedule = match (a.bits, a.schedule) {
            (Some(b), _) => ScheduleChoice::Rows(BitSchedule::uniform(b)),
            (None, Some(TableArg::Table1)) => ScheduleChoice::Named("table1".into()),
            (None, Some(TableArg::Table2)) => ScheduleChoice::Named("table2".into()),
            (None, None) => ScheduleChoice::Named(if d.l > 0 { "table2" } else { "table1" }.into()),
        };
        let grid = |v: &[f64]| (!v.is_empty()).then(|| v.to_vec());
        let spec = SweepSpec {
            // Baseline-only runs still need a valid grid; the CLSK cells are filtered out below.
            sigma: if a.sigma.is_empty() { vec![0.0] } else { a.sigma.clone() },
            epsilon: grid(&a.epsilon),
            alpha: grid(&a.alpha),
            spreading_factor: (!a.sf.is_empty()).then(|| a.sf.clone()),
            schedule,
            scale: if a.full_scale { Scale::Full } else { Scale::Desk { cap: a.desk_cap } },
            seed: 1,
            sde: a.sde.into(),
            baselines: (!a.ebn0.is_empty()).then(|| BaselineSpec {
                ebn0_db: a.ebn0.clone(),
                spreading_factor: a.baseline_sf,
                bits: a.baseline_bits,
                dt: 1e-3,
            }),
        };
        SweepConfig::from_spec(d, &spec)?
    };
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn ber(cli: &Cli, a: &BerArgs, m: &mut RunManifest) -> Result<()> {
    if let Some(j) = a.jobs {
        if j == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("configuring worker threads")?;
    }
    let d = load_design(cli, m)?;
    let cfg = sweep_config(cli, a, d, m)?;
    m.seed = Some(cfg.seed);
    let keep = |s: Scheme| {
        a.scheme.is_empty()
            || a.scheme.iter().any(|x| match x {
                SchemeArg::Clsk => s == Scheme::Clsk,
                SchemeArg::Csk => s == Scheme::Csk,
                SchemeArg::Dcsk => s == Scheme::Dcsk,
            })
    };
    let cells: Vec<_> = cfg.cells()?.into_iter().filter(|c| keep(c.key.scheme)).collect();
    let path = m.out_dir.join("ber.csv");
    let done = if a.resume {
        load_ber_csv(&path)?
    } else {
        if path.exists() {
            fs::remove_file(&path)?;
        }
        Vec::new()
    };
    let todo = pending_cells(&cells, &done);
    println!("{} cells, {} already done, {} to run", cells.len(), cells.len() - todo.len(), todo.len());
    let outcomes = run_cells(&cfg, &todo);
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => {
                println!(
                    "{:?} sigma {} eps {:?} alpha {:?} s_f {}: {}/{} errors, pe {:.3e}",
                    r.scheme, r.sigma, r.epsilon, r.alpha, r.spreading_factor, r.errors, r.bits, r.pe
                );
                ok.push(r);
            }
            Err(f) => {
                eprintln!("cell {:?} failed: {}", f.cell.key, f.error);
                failed.push(json!({ "key": format!("{:?}", f.cell.key), "seed": f.cell.seed, "error": f.error }));
            }
        }
    }
    append_ber_csv(&path, &ok)?;
    m.output("ber.csv")?;
    if a.svg {
        let all = load_ber_csv(&path)?;
        fs::write(m.out_dir.join("ber.svg"), ber_svg(&all))?;
        m.output("ber.svg")?;
    }
    if failed.is_empty() {
        return Ok(());
    }
    write_json(m, "ber_failures.json", &failed)?;
    Err(Failure { code: exit::DIVERGENCE, message: format!("{} cells failed", failed.len()) }.into())
}

fn parse_link(s: &str) -> Result<(usize, usize)> {
    let parse = |p: &str| p.trim().parse::<usize>().ok().filter(|v| *v > 0);
    match s.split_once('-').map(|(a, b)| (parse(a), parse(b))) {
        Some((Some(a), Some(b))) if a != b => Ok((a - 1, b - 1)),
        _ => Err(Failure::usage(format!("link must look like 1-2 with distinct 1-based nodes, got '{s}'"))),
    }
}

fn read_traces(p: &Path) -> Result<ObservedTraces> {
    let f = File::open(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
    Ok(ObservedTraces::read_csv(f)?)
}

fn spectrogram_cmd(cli: &Cli, a: &SpectrogramArgs, m: &mut RunManifest) -> Result<()> {
    let traces = read_traces(&a.input)?;
    m.input(&a.input)?;
    if traces.times.len() < 2 || traces.nodes.len() < 2 {
        return Err(Failure::usage("trace file needs at least two nodes and two samples"));
    }
    let (i, j) = match &a.link {
        Some(s) => parse_link(s)?,
        None => (traces.nodes[0], traces.nodes[1]),
    };
    let symbol_samples = match a.symbol_samples {
        Some(n) => n,
        None => load_design(cli, m)?.simulation.spreading_factor,
    };
    let dt = traces.times[1] - traces.times[0];
    let signal = traces.error_series(i, j)?;
    let spec = spectrogram(&signal, dt, a.window, a.overlap)?;
    spec.write_csv(create(m, "spectrogram.csv")?)?;
    m.output("spectrogram.csv")?;
    fs::write(m.out_dir.join("spectrogram.svg"), spectrogram_svg(&spec))?;
    m.output("spectrogram.svg")?;
    let test = centroid_boundary_test(&spec, symbol_samples, a.offset)?;
    write_json(
        m,
        "centroid_test.json",
        &json!({
            "link": [i + 1, j + 1],
            "window": spec.window,
            "hop": spec.hop,
            "dt": dt,
            "symbol_samples": symbol_samples,
            "offset": a.offset,
            "indistinguishable_at_0_05": test.indistinguishable(0.05),
            "test": test,
        }),
    )?;
    println!(
        "link {}-{}: {} columns, centroid jumps across {} / within {}, t = {:.3}, p = {:.4}",
        i + 1,
        j + 1,
        spec.mag.len(),
        test.across.len(),
        test.within.len(),
        test.test.t,
        test.test.p_value
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_strings() {
        assert_eq!(parse_bits("01_10").unwrap(), vec![0, 1, 1, 0]);
        assert!(parse_bits("012").is_err());
        assert!(parse_bits(" ").is_err());
    }

    #[test]
    fn link_specs() {
        assert_eq!(parse_link("1-2").unwrap(), (0, 1));
        assert_eq!(parse_link(" 8 - 3").unwrap(), (7, 2));
        for bad in ["0-1", "2-2", "1", "a-b"] {
            assert!(parse_link(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn msf_grid_includes_both_ends() {
        let a = MsfArgs { eta_min: -2.0, eta_max: 0.0, eta_step: 0.5, dt: 1e-3, transient: 1.0, horizon: 1.0 };
        assert_eq!(msf_grid(&a).unwrap(), vec![-2.0, -1.5, -1.0, -0.5, 0.0]);
        let a = MsfArgs { eta_step: 0.0, ..a };
        assert!(msf_grid(&a).is_err());
    }
}
