// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use multiplex_epidemic::edgelist::{self, EdgelistFile};
use multiplex_epidemic::netgen::{DEFAULT_ASN_TOLERANCE, DEFAULT_DDC_TOLERANCE};
use multiplex_epidemic::report::{self, fmt_sig};
use multiplex_epidemic::sim::{self, LambdaGrid, SimConfig, SimGraph};
use multiplex_epidemic::{
    asn, build_multiplex, ddc, rng, CouplingSpec, DdcMode, Error, LayerKind, LayerSpec,
    MultiplexGraph, SpreadingRate, Theory,
};

use crate::{
    Command, Common, GenerateArgs, MetricsArgs, NetworkArgs, NetworkKind, StudyArgs, StudyKind,
    SweepArgs, ThresholdArgs,
};

pub const STUDY_HEADER: &str =
    "target,achieved,status,threshold,s_theory,s_sim,stderr,outbreak_prob,realizations,instances";

/// Some fixed-point solves hit the iteration cap; output was still written.
#[derive(Debug)]
pub struct Unconverged(pub usize);

impl std::fmt::Display for Unconverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} outbreak-size fixed point(s) did not converge; last iterates were written",
            self.0
        )
    }
}

impl std::error::Error for Unconverged {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Unconverged>().is_some() {
        return 3;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::Convergence { .. }) => 3,
        _ => 1,
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => {
            setup(&a.common)?;
            generate(a)
        }
        Command::Metrics(a) => {
            setup(&a.common)?;
            metrics(a)
        }
        Command::Threshold(a) => {
            setup(&a.common)?;
            threshold(a)
        }
        Command::Sweep(a) => {
            setup(&a.common)?;
            sweep(a)
        }
        Command::Study(a) => {
            setup(&a.common)?;
            study(a)
        }
    }
}

fn setup(common: &Common) -> Result<()> {
    if let Some(n) = common.threads {
        if n == 0 {
            bail!(Error::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(p) => create(p),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Human-readable summary: stdout when the data goes to a file, stderr
/// when the data itself is on stdout.
fn notice(common: &Common, line: &str) {
    if common.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn read_graph(path: &Path) -> Result<EdgelistFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    edgelist::read(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn kind_name(k: NetworkKind) -> String {
    k.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn layer_specs(net: &NetworkArgs) -> Result<(LayerSpec, LayerSpec)> {
    let (a, b) = match net.kind {
        NetworkKind::ErEr => (LayerKind::Er, LayerKind::Er),
        NetworkKind::ErSf => (LayerKind::Er, LayerKind::Sf),
        NetworkKind::SfEr => (LayerKind::Sf, LayerKind::Er),
        NetworkKind::SfSf => (LayerKind::Sf, LayerKind::Sf),
    };
    Ok((
        LayerSpec::new(a, net.n, net.ka)?,
        LayerSpec::new(b, net.n, net.kb)?,
    ))
}

fn network_meta(net: &NetworkArgs) -> Vec<String> {
    vec![
        format!("kind={}", kind_name(net.kind)),
        format!("n={}", net.n),
        format!("ka={}", net.ka),
        format!("kb={}", net.kb),
    ]
}

fn graph_meta(path: &Path, file: &EdgelistFile) -> Vec<String> {
    let mut m = vec![format!("graph={}", path.display())];
    m.extend(file.metadata.iter().map(|l| format!("graph: {l}")));
    m
}

fn summary(g: &MultiplexGraph) -> String {
    let (ka, kb) = g.mean_degrees();
    let alpha = asn(g).unwrap_or(f64::NAN);
    let beta = g
        .joint_distribution()
        .and_then(|j| ddc(&j, DdcMode::Pearson))
        .unwrap_or(f64::NAN);
    format!(
        "mean_degree_a={} mean_degree_b={} asn={} ddc={}",
        fmt_sig(ka),
        fmt_sig(kb),
        fmt_sig(alpha),
        fmt_sig(beta)
    )
}

fn generate(a: GenerateArgs) -> Result<()> {
    let (spec_a, spec_b) = layer_specs(&a.network)?;
    let mut meta = vec!["mxepi generate".to_string()];
    meta.extend(network_meta(&a.network));
    let coupling = match (a.asn, a.ddc) {
        (Some(t), _) => {
            let tol = a.network.tolerance.unwrap_or(DEFAULT_ASN_TOLERANCE);
            meta.push(format!("asn={t}"));
            meta.push(format!("tolerance={tol}"));
            CouplingSpec::asn(t).with_tolerance(tol)
        }
        (None, Some(t)) => {
            let tol = a.network.tolerance.unwrap_or(DEFAULT_DDC_TOLERANCE);
            meta.push(format!("ddc={t}"));
            meta.push(format!("tolerance={tol}"));
            CouplingSpec::ddc(t).with_tolerance(tol)
        }
        (None, None) => {
            meta.push("note: no coupling target; layer B randomly relabeled (ddc near 0)".into());
            CouplingSpec::none()
        }
    };
    meta.push(format!("seed={}", a.common.seed));
    meta.push(rng::header(a.common.seed));

    let coupled = build_multiplex(&spec_a, &spec_b, &coupling, a.common.seed)?;
    if !coupled.met {
        eprintln!(
            "warning: ddc target {} not reached within {}; best achieved {}",
            a.ddc.unwrap_or(f64::NAN),
            coupling.tolerance,
            fmt_sig(coupled.achieved)
        );
    }
    let line = summary(&coupled.graph);
    meta.push(format!("measured {line}"));
    edgelist::write(open_out(&a.common.out)?, &coupled.graph, &meta)?;
    notice(&a.common, &line);
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let file = read_graph(&a.graph)?;
    let g = &file.graph;
    let c = g.classify_edges();
    let (ka, kb) = g.mean_degrees();
    let dist = g.vector_distribution()?;
    let joint = g.joint_distribution()?;
    let or_nan = |r: multiplex_epidemic::Result<f64>| fmt_sig(r.unwrap_or(f64::NAN));
    let lines = [
        format!("n={}", g.n()),
        format!("edges_a={}", g.edges_a().len()),
        format!("edges_b={}", g.edges_b().len()),
        format!("edges_shared={}", c.shared.len()),
        format!("mean_degree_a={}", fmt_sig(ka)),
        format!("mean_degree_b={}", fmt_sig(kb)),
        format!("mean_magnitude={}", fmt_sig(dist.mean_magnitude())),
        format!("asn={}", or_nan(asn(g))),
        format!("ddc_pearson={}", or_nan(ddc(&joint, DdcMode::Pearson))),
        format!("ddc_literal={}", or_nan(ddc(&joint, DdcMode::Literal))),
    ];
    let mut w = open_out(&a.common.out)?;
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn threshold(a: ThresholdArgs) -> Result<()> {
    let file = read_graph(&a.graph)?;
    let theory = Theory::new(&file.graph.vector_distribution()?, a.weighting);
    let curve = theory.threshold_curve(a.step)?;

    let mut meta = vec!["mxepi threshold".to_string()];
    meta.extend(graph_meta(&a.graph, &file));
    meta.push(format!("step={}", a.step));
    meta.push(format!("weighting={}", a.weighting));
    meta.push(format!("seed={}", a.common.seed));
    meta.push(rng::header(a.common.seed));
    report::write_curve(open_out(&a.common.out)?, &curve, &meta)?;

    let show = |x: Option<f64>| x.map_or("none".to_string(), fmt_sig);
    let g = &file.graph;
    if g.edges_b().is_empty() {
        notice(&a.common, &format!("lambda_a_c={}", show(theory.axis_threshold_a()?)));
    } else if g.edges_a().is_empty() {
        notice(&a.common, &format!("lambda_b_c={}", show(theory.axis_threshold_b()?)));
    } else {
        notice(
            &a.common,
            &format!(
                "lambda_a_c={} lambda_b_c={} diagonal_c={}",
                show(theory.axis_threshold_a()?),
                show(theory.axis_threshold_b()?),
                show(theory.diagonal_threshold()?)
            ),
        );
    }
    Ok(())
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Input(format!("bad {what} value `{t}`")).into())
        })
        .collect()
}

fn section_path(out: &Path, lambda_a: f64) -> PathBuf {
    let stem = out.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_la{}.{}", fmt_sig(lambda_a), ext.to_string_lossy()),
        None => format!("{stem}_la{}", fmt_sig(lambda_a)),
    };
    out.with_file_name(name)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let file = read_graph(&a.graph)?;
    let axis = sim::linspace_step(a.lambda_min, a.lambda_max, a.step)?;
    let sections: Vec<Option<f64>> = match &a.fix_lambda_a {
        Some(list) => {
            let v = parse_list(list, "lambda_a")?;
            if v.is_empty() {
                bail!(Error::Input("--fix-lambda-a needs at least one value".into()));
            }
            v.into_iter().map(Some).collect()
        }
        None => vec![None],
    };

    let mut meta = vec!["mxepi sweep".to_string()];
    meta.extend(graph_meta(&a.graph, &file));
    meta.push(format!("step={}", a.step));
    meta.push(format!("lambda_min={}", a.lambda_min));
    meta.push(format!("lambda_max={}", a.lambda_max));
    if let Some(list) = &a.fix_lambda_a {
        meta.push(format!("fix_lambda_a={list}"));
    }
    meta.push(format!("weighting={}", a.weighting));
    if a.theory_only {
        meta.push("theory_only=true".into());
    } else {
        meta.push(format!("realizations={}", a.realizations));
        meta.push(format!("mode={}", a.mode));
    }
    meta.push(format!("seed={}", a.common.seed));
    meta.push(rng::header(a.common.seed));

    let mut unconverged = 0;
    let mut stdout_sink = match a.common.out {
        None => Some(open_out(&None)?),
        Some(_) => None,
    };
    for section in sections {
        let grid = match section {
            Some(la) => LambdaGrid::new(vec![la], axis.clone())?,
            None => LambdaGrid::new(axis.clone(), axis.clone())?,
        };
        let mut w: Box<dyn Write> = match (&a.common.out, section) {
            (Some(out), Some(la)) => create(&section_path(out, la))?,
            (Some(out), None) => create(out)?,
            (None, _) => Box::new(stdout_sink.as_mut().expect("stdout sink")),
        };
        if a.theory_only {
            let rows = sim::theory_sweep(&file.graph, &grid, a.weighting)?;
            unconverged += rows.iter().filter(|r| !r.3).count();
            let rows: Vec<(f64, f64, f64)> = rows.into_iter().map(|r| (r.0, r.1, r.2)).collect();
            report::write_theory_sweep(&mut w, &rows, &meta)?;
        } else {
            let cfg = SimConfig {
                realizations: a.realizations,
                master_seed: a.common.seed,
                mode: a.mode,
                ..SimConfig::default()
            };
            let every = (grid.len() / 20).max(1);
            let result = sim::phase_diagram(&file.graph, &grid, &cfg, a.weighting, |done, total| {
                if done % every == 0 || done == total {
                    eprintln!("sweep: {done}/{total} grid points");
                }
            })?;
            unconverged += result.rows.iter().filter(|r| !r.theory_converged).count();
            report::write_sweep(&mut w, &result, &meta)?;
        }
    }
    if unconverged > 0 {
        return Err(Unconverged(unconverged).into());
    }
    Ok(())
}

struct StudyRow {
    target: f64,
    achieved: f64,
    status: &'static str,
    threshold: f64,
    s_theory: f64,
    s_sim: f64,
    stderr: f64,
    outbreak_prob: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn study(a: StudyArgs) -> Result<()> {
    let (spec_a, spec_b) = layer_specs(&a.network)?;
    let targets = parse_list(&a.targets, "target")?;
    let rate = SpreadingRate::new(a.lambda, a.lambda)?;
    if a.instances == 0 {
        bail!(Error::Input("--instances must be at least 1".into()));
    }
    let tolerance = a.network.tolerance.unwrap_or(match a.study {
        StudyKind::Asn => DEFAULT_ASN_TOLERANCE,
        StudyKind::Ddc => DEFAULT_DDC_TOLERANCE,
    });
    let study_name = match a.study {
        StudyKind::Asn => "asn",
        StudyKind::Ddc => "ddc",
    };

    let mut meta = vec![format!("mxepi study {study_name}")];
    meta.extend(network_meta(&a.network));
    meta.push(format!("targets={}", a.targets));
    meta.push(format!("tolerance={tolerance}"));
    meta.push(format!("lambda={}", a.lambda));
    meta.push(format!("instances={}", a.instances));
    meta.push(format!("weighting={}", a.weighting));
    if a.theory_only {
        meta.push("theory_only=true".into());
    } else {
        meta.push(format!("realizations={}", a.realizations));
        meta.push(format!("mode={}", a.mode));
    }
    meta.push(format!("seed={}", a.common.seed));
    meta.push(rng::header(a.common.seed));
    meta.push("note: instance i uses seed + i; threshold is the diagonal crossing".into());

    let mut rows = Vec::with_capacity(targets.len());
    let mut unconverged = 0;
    for &target in &targets {
        let coupling = match a.study {
            StudyKind::Asn => CouplingSpec::asn(target),
            StudyKind::Ddc => CouplingSpec::ddc(target),
        }
        .with_tolerance(tolerance);
        let mut status = "ok";
        let (mut achieved, mut thresholds, mut s_th) = (vec![], vec![], vec![]);
        let (mut s_sim, mut var_sum, mut p_out) = (vec![], 0.0, vec![]);
        for i in 0..a.instances as u64 {
            let seed = a.common.seed.wrapping_add(i);
            let coupled = match build_multiplex(&spec_a, &spec_b, &coupling, seed) {
                Ok(c) => c,
                Err(Error::Infeasible(msg)) => {
                    eprintln!("study: target {target}: {msg}");
                    status = "infeasible";
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            if !coupled.met {
                status = "unmet";
            }
            achieved.push(coupled.achieved);
            let theory = Theory::new(&coupled.graph.vector_distribution()?, a.weighting);
            thresholds.push(theory.diagonal_threshold()?.unwrap_or(f64::NAN));
            let (s, ok) = sim::theory_outbreak(&theory, &rate)?;
            unconverged += usize::from(!ok);
            s_th.push(s);
            if !a.theory_only {
                let cfg = SimConfig {
                    realizations: a.realizations,
                    master_seed: seed,
                    mode: a.mode,
                    ..SimConfig::default()
                };
                let res = sim::run_ensemble(&SimGraph::new(&coupled.graph), &rate, &cfg)?;
                let (m, se) = res.estimate(a.mode);
                s_sim.push(m);
                var_sum += se * se;
                p_out.push(res.outbreak_probability);
            }
        }
        eprintln!("study: target {target} done ({status})");
        let nan = f64::NAN;
        rows.push(if status == "infeasible" {
            StudyRow {
                target,
                achieved: nan,
                status,
                threshold: nan,
                s_theory: nan,
                s_sim: nan,
                stderr: nan,
                outbreak_prob: nan,
            }
        } else {
            let k = achieved.len() as f64;
            let simulated = !s_sim.is_empty();
            StudyRow {
                target,
                achieved: mean(&achieved),
                status,
                threshold: mean(&thresholds),
                s_theory: mean(&s_th),
                s_sim: if simulated { mean(&s_sim) } else { nan },
                stderr: if simulated { var_sum.sqrt() / k } else { nan },
                outbreak_prob: if simulated { mean(&p_out) } else { nan },
            }
        });
    }

    let realizations = if a.theory_only { 0 } else { a.realizations };
    let mut w = open_out(&a.common.out)?;
    for m in &meta {
        writeln!(w, "#{m}")?;
    }
    writeln!(w, "{STUDY_HEADER}")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(r.target),
            fmt_sig(r.achieved),
            r.status,
            fmt_sig(r.threshold),
            fmt_sig(r.s_theory),
            fmt_sig(r.s_sim),
            fmt_sig(r.stderr),
            fmt_sig(r.outbreak_prob),
            realizations,
            a.instances
        )?;
    }
    w.flush()?;
    if unconverged > 0 {
        return Err(Unconverged(unconverged).into());
    }
    Ok(())
}
