use std::collections::BTreeMap;
use std::path::PathBuf;

use wavelab::decomp::{angular_frame, angular_piece_bounds, expand_symbol, AngularOptions, ExpansionOptions};
use wavelab::harness::{
    append_records, emit_csv, emit_jsonl, emit_plotdata, identity_suite, read_store, summarize, unique_records,
    Exponent, RunConfig, RECORDS_FILE, SUMMARY_FILE,
};
use wavelab::kernels::probes::ball_profile;
use wavelab::kernels::{kernel_lp_norms, l1_scaling_probe, ProbeVariant};
use wavelab::operators::BilinearSymbol;
use wavelab::sharpness::record::exponent;
use wavelab::sharpness::{
    run_case1, run_case2, run_case3, upper_bound_sweep, ExperimentRecord, SharpnessConfig, SweepConfig,
};
use wavelab::symbols::{Cutoff, CutoffKind, FnProfile, SymbolFamily, WavePhase};
use wavelab::{Error, Result};

use crate::{Cli, Command, Family, Format, Variant, EXIT_NUMERICAL, EXIT_OK};

struct Ctx {
    cfg: RunConfig,
    out_dir: PathBuf,
    seed: u64,
}

pub(crate) fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out_dir = cli.global.out_dir.clone().unwrap_or_else(|| cfg.out_dir());
    let seed = cli.global.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx { cfg, out_dir, seed };
    match cli.command {
        Command::PartitionCheck { instances } => partition_check(&ctx, instances),
        Command::KernelScan { n, p, jmin, jmax } => kernel_scan(&ctx, n, p, jmin, jmax),
        Command::L1Probe { n, variant, jmin, jmax } => l1_probe(&ctx, n, variant, jmin, jmax),
        Command::AngularCheck { jmin, jmax } => angular_check(&ctx, jmin, jmax),
        Command::ExpandSymbol {
            n,
            family,
            m,
            jmax,
            radius,
        } => expand(&ctx, n, family, m, jmax, radius),
        Command::Sharpness {
            case,
            n,
            p,
            q,
            jmin,
            jmax,
            delta,
            draws,
        } => sharpness(
            &ctx,
            SharpnessArgs {
                case,
                n,
                p,
                q,
                jmin,
                jmax,
                delta,
                draws,
            },
        ),
        Command::UpperBound {
            p,
            q,
            m,
            jmin,
            jmax,
            random_pairs,
        } => upper(&ctx, p, q, m, jmin, jmax, random_pairs),
        Command::Report { format, store, output } => report(&ctx, format, store, output),
    }
}

fn exps(v: Vec<Exponent>) -> Vec<f64> {
    v.into_iter().map(|e| e.0).collect()
}

fn window(
    jmin: Option<i32>,
    jmax: Option<i32>,
    file: (Option<i32>, Option<i32>),
    default: (i32, i32),
) -> Result<(i32, i32)> {
    let lo = jmin.or(file.0).unwrap_or(default.0);
    let hi = jmax.or(file.1).unwrap_or(default.1);
    if hi - lo < 2 {
        return Err(Error::Precondition(format!(
            "scale window {lo}..={hi} needs at least 3 scales"
        )));
    }
    Ok((lo, hi))
}

/// Appends to the store, writes the run summary and prints it.
fn persist(ctx: &Ctx, records: &[ExperimentRecord]) -> Result<()> {
    let store = ctx.out_dir.join(RECORDS_FILE);
    append_records(&store, records)?;
    let csv = emit_csv(records)?;
    std::fs::write(ctx.out_dir.join(SUMMARY_FILE), &csv)?;
    print!("{csv}");
    eprintln!("records appended to {}", store.display());
    Ok(())
}

fn partition_check(ctx: &Ctx, instances: Option<usize>) -> Result<i32> {
    let instances = instances.or(ctx.cfg.partition_check.instances).unwrap_or(100);
    if instances == 0 {
        return Err(Error::Precondition("instances must be positive".into()));
    }
    let mut ok = true;
    for c in identity_suite(ctx.seed, instances)? {
        ok &= c.passed();
        println!(
            "{} {} instances={} max_error={:e} tolerance={:e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.instances,
            c.max_error,
            c.tolerance
        );
    }
    Ok(if ok { EXIT_OK } else { EXIT_NUMERICAL })
}

fn kernel_scan(
    ctx: &Ctx,
    n: Option<usize>,
    p: Option<Vec<Exponent>>,
    jmin: Option<i32>,
    jmax: Option<i32>,
) -> Result<i32> {
    let f = &ctx.cfg.kernel_scan;
    let n = n.or(f.n).unwrap_or(2);
    let ps = exps(
        p.or(f.p.clone())
            .unwrap_or_else(|| vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)]),
    );
    let (lo, hi) = window(jmin, jmax, (f.jmin, f.jmax), (6, 11))?;
    let psi = Cutoff::new(CutoffKind::Psi, 0);
    let mut records = Vec::new();
    for j in lo..=hi {
        let k = kernel_lp_norms(&psi, j, n, &ps)?;
        for &(p, value) in &k.norms {
            let mut extra = BTreeMap::new();
            extra.insert("half_width".into(), k.half_width);
            extra.insert("max_doubling_change".into(), k.max_doubling_change);
            records.push(ExperimentRecord {
                case: "kernel".into(),
                n,
                p,
                q: f64::INFINITY,
                r: p,
                m: 0.0,
                j,
                value,
                input_norms: vec![],
                ratio: value,
                grid: None,
                seed: ctx.seed,
                extra,
            });
        }
    }
    persist(ctx, &records)?;
    Ok(EXIT_OK)
}

fn l1_probe(
    ctx: &Ctx,
    n: Option<usize>,
    variant: Option<Variant>,
    jmin: Option<i32>,
    jmax: Option<i32>,
) -> Result<i32> {
    let f = &ctx.cfg.l1_probe;
    let n = n.or(f.n).unwrap_or(2);
    let variant = match (variant, f.variant.as_deref()) {
        (Some(v), _) => v,
        (None, None | Some("highpass")) => Variant::Highpass,
        (None, Some("lowpass")) => Variant::Lowpass,
        (None, Some(other)) => return Err(Error::Config(format!("unknown probe variant {other:?}"))),
    };
    let (lo, hi) = window(jmin, jmax, (f.jmin, f.jmax), (4, 9))?;
    let js: Vec<i32> = (lo..=hi).collect();
    let phase = WavePhase::euclidean();
    let (report, case) = match variant {
        Variant::Highpass => (
            l1_scaling_probe(&phase, &Cutoff::new(CutoffKind::Psi, 0), n, &js, ProbeVariant::Highpass)?,
            "l1-highpass",
        ),
        Variant::Lowpass => {
            let ball = FnProfile::new(ball_profile, (0.0, 2.0));
            (
                l1_scaling_probe(&phase, &ball, n, &js, ProbeVariant::Lowpass)?,
                "l1-lowpass",
            )
        }
    };
    let records: Vec<ExperimentRecord> = report
        .values
        .iter()
        .map(|&(j, value)| ExperimentRecord {
            case: case.into(),
            n,
            p: 1.0,
            q: f64::INFINITY,
            r: 1.0,
            m: 0.0,
            j,
            value,
            input_norms: vec![],
            ratio: value,
            grid: None,
            seed: ctx.seed,
            extra: BTreeMap::new(),
        })
        .collect();
    persist(ctx, &records)?;
    Ok(EXIT_OK)
}

fn angular_check(ctx: &Ctx, jmin: Option<i32>, jmax: Option<i32>) -> Result<i32> {
    let f = &ctx.cfg.angular_check;
    let (lo, hi) = window(jmin, jmax, (f.jmin, f.jmax), (4, 9))?;
    let phase = WavePhase::euclidean();
    let mut records = Vec::new();
    for j in lo..=hi {
        let frame = angular_frame(j, 2)?;
        let rep = angular_piece_bounds(&frame, &phase, &AngularOptions::default())?;
        let l1: Vec<f64> = rep.pieces.iter().map(|p| p.l1).collect();
        let mut extra = BTreeMap::new();
        extra.insert("count".into(), frame.count as f64);
        extra.insert("piece_l1_min".into(), l1.iter().cloned().fold(f64::INFINITY, f64::min));
        extra.insert("piece_l1_max".into(), l1.iter().cloned().fold(0.0, f64::max));
        extra.insert(
            "c_transverse".into(),
            rep.pieces.iter().map(|p| p.c_transverse).fold(0.0, f64::max),
        );
        extra.insert(
            "c_longitudinal".into(),
            rep.pieces.iter().map(|p| p.c_longitudinal).fold(0.0, f64::max),
        );
        extra.insert("derivative_1".into(), frame.derivative_sup(1));
        extra.insert("derivative_2".into(), frame.derivative_sup(2));
        records.push(ExperimentRecord {
            case: "angular".into(),
            n: 2,
            p: 1.0,
            q: f64::INFINITY,
            r: 1.0,
            m: 0.0,
            j,
            value: rep.total_l1,
            input_norms: vec![],
            ratio: rep.total_l1,
            grid: None,
            seed: ctx.seed,
            extra,
        });
    }
    persist(ctx, &records)?;
    Ok(EXIT_OK)
}

fn expand(
    ctx: &Ctx,
    n: Option<usize>,
    family: Option<Family>,
    m: Option<f64>,
    jmax: Option<i32>,
    radius: Option<usize>,
) -> Result<i32> {
    let f = &ctx.cfg.expand_symbol;
    let n = n.or(f.n).unwrap_or(1);
    let m = m.or(f.m).unwrap_or(-1.0);
    let jmax = jmax.or(f.jmax).unwrap_or(3);
    let family = match (family, f.family.as_deref()) {
        (Some(v), _) => v,
        (None, None | Some("power")) => Family::Power,
        (None, Some("sigma")) => Family::Sigma,
        (None, Some(other)) => return Err(Error::Config(format!("unknown symbol family {other:?}"))),
    };
    let sigma = match family {
        Family::Power => BilinearSymbol::from_family(&SymbolFamily::Power { m }),
        Family::Sigma => BilinearSymbol::from_family(&SymbolFamily::SigmaJ { m, j: jmax }),
    };
    let mut opts = ExpansionOptions::default();
    if let Some(r) = radius.or(f.radius) {
        opts.radius = r;
    }
    let (_, blocks) = expand_symbol(&sigma, n, jmax, &opts)?;
    println!("left,right,terms,max_coefficient,tail_bound,decay_a,decay_b");
    for b in &blocks {
        println!(
            "{},{},{},{},{},{},{}",
            b.left.scale,
            b.right.scale,
            b.terms.len(),
            b.max_coefficient,
            b.tail_bound,
            b.decay_a,
            b.decay_b
        );
    }
    Ok(EXIT_OK)
}

struct SharpnessArgs {
    case: Option<u8>,
    n: Option<usize>,
    p: Option<Vec<Exponent>>,
    q: Option<Vec<Exponent>>,
    jmin: Option<i32>,
    jmax: Option<i32>,
    delta: Option<f64>,
    draws: Option<usize>,
}

fn sharpness(ctx: &Ctx, a: SharpnessArgs) -> Result<i32> {
    let f = &ctx.cfg.sharpness;
    let case = a.case.or(f.case).unwrap_or(1);
    if !(1..=3).contains(&case) {
        return Err(Error::Precondition(format!("case {case} is not one of 1, 2, 3")));
    }
    let (dp, dq) = match case {
        1 => (1.0, 1.0),
        2 => (f64::INFINITY, f64::INFINITY),
        _ => (1.0, f64::INFINITY),
    };
    let ps = exps(a.p.or(f.p.clone()).unwrap_or_else(|| vec![Exponent(dp)]));
    let qs = exps(a.q.or(f.q.clone()).unwrap_or_else(|| vec![Exponent(dq)]));
    if ps.len() != qs.len() {
        return Err(Error::Precondition(format!(
            "{} values of p but {} values of q",
            ps.len(),
            qs.len()
        )));
    }
    let default = if case == 3 { (5, 8) } else { (4, 7) };
    let (lo, hi) = window(a.jmin, a.jmax, (f.jmin, f.jmax), default)?;
    let mut records = Vec::new();
    for (&p, &q) in ps.iter().zip(&qs) {
        let mut cfg = SharpnessConfig::new(a.n.or(f.n).unwrap_or(2), p, q, lo, hi);
        cfg.seed = ctx.seed;
        if let Some(d) = a.delta.or(f.delta) {
            cfg.delta = d;
        }
        if let Some(d) = a.draws.or(f.draws) {
            cfg.draws = d;
        }
        let out = match case {
            1 => run_case1(&cfg)?,
            2 => run_case2(&cfg)?,
            _ => run_case3(&cfg)?,
        };
        eprintln!(
            "{} p={} q={}: slope {:.4} ± {:.4}",
            out.case,
            exponent::format(p),
            exponent::format(q),
            out.fit.slope,
            out.fit.stderr
        );
        records.extend(out.records);
    }
    persist(ctx, &records)?;
    Ok(EXIT_OK)
}

fn upper(
    ctx: &Ctx,
    p: Option<Vec<Exponent>>,
    q: Option<Vec<Exponent>>,
    m: Option<Vec<f64>>,
    jmin: Option<i32>,
    jmax: Option<i32>,
    random_pairs: Option<usize>,
) -> Result<i32> {
    let f = &ctx.cfg.upper_bound;
    let ps = exps(p.or(f.p.clone()).unwrap_or_else(|| vec![Exponent(1.0)]));
    let qs = exps(q.or(f.q.clone()).unwrap_or_else(|| vec![Exponent(f64::INFINITY)]));
    let ms = m.or(f.m.clone()).unwrap_or_else(|| vec![-1.0]);
    if ps.len() != qs.len() || ps.len() != ms.len() {
        return Err(Error::Precondition(format!(
            "p, q and m lists differ in length ({}, {}, {})",
            ps.len(),
            qs.len(),
            ms.len()
        )));
    }
    let (lo, hi) = window(jmin, jmax, (f.jmin, f.jmax), (4, 7))?;
    let mut records = Vec::new();
    for ((&p, &q), &m) in ps.iter().zip(&qs).zip(&ms) {
        let mut cfg = SweepConfig::new(p, q, m);
        cfg.j_min = lo;
        cfg.j_max = hi;
        cfg.seed = ctx.seed;
        if let Some(r) = random_pairs.or(f.random_pairs) {
            cfg.random_pairs = r;
        }
        records.extend(upper_bound_sweep(&cfg)?.records);
    }
    persist(ctx, &records)?;
    Ok(EXIT_OK)
}

fn report(ctx: &Ctx, format: Option<Format>, store: Option<PathBuf>, output: Option<PathBuf>) -> Result<i32> {
    let f = &ctx.cfg.report;
    let format = match (format, f.format.as_deref()) {
        (Some(v), _) => v,
        (None, None | Some("csv")) => Format::Csv,
        (None, Some("jsonl")) => Format::Jsonl,
        (None, Some("plotdata")) => Format::Plotdata,
        (None, Some(other)) => return Err(Error::Config(format!("unknown report format {other:?}"))),
    };
    let store = store
        .or(f.store.clone())
        .unwrap_or_else(|| ctx.out_dir.join(RECORDS_FILE));
    let records = unique_records(&read_store(&store)?);
    let text = match format {
        Format::Csv => emit_csv(&records)?,
        Format::Jsonl => emit_jsonl(&records)?,
        Format::Plotdata => emit_plotdata(&records)?,
    };
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    let series = summarize(&records);
    eprintln!("{} records in {} series", records.len(), series.len());
    Ok(EXIT_OK)
}
