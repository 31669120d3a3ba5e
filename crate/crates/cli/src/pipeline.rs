use crate::inputs::{self, Corpus};
use crate::{CorpusArgs, Question};
use anyhow::{Context, Result};
use roaddiv::aggregation::DiversityMeasureId;
use roaddiv::behavior::{validate_trace, BehaviorNorms, BehavioralDiversity, TraceReport};
use roaddiv::distances::Schedule;
use roaddiv::io::{
    correlation_cells, generate_synthetic_corpus, write_correlations, write_dm_table, write_json,
    write_records, write_stats, ResultMeta, RunConfig, SynthSpec,
};
use roaddiv::study::{
    additivity_experiment, behavior_features_by_road, duplicate_experiment, efficiency_experiment,
    growth_experiment, rq2_pairwise_dm_correlation, rq3_length_effect, rq4_dm_bd_correlation,
    sample_suites, suite_behavioral_diversity, summarize, CorrelationResult, DmTable,
    ExperimentKind, ExperimentRecord, LengthSide, PoolEvaluator, Rq4Mode, TestSuite,
};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

fn report_exclusions(corpus: &Corpus) {
    let c = &corpus.loaded;
    eprintln!(
        "{}: {} roads accepted, {} excluded",
        corpus.roads_path.display(),
        c.roads.len(),
        c.excluded.len()
    );
    for (id, reason) in &c.excluded {
        eprintln!("  excluded {id}: {reason}");
    }
    if let Some(p) = &corpus.manifest_problem {
        eprintln!("  manifest: {p}");
    }
}

#[derive(Serialize)]
struct ExcludedRoad<'a> {
    id: &'a str,
    reason: &'a str,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    meta: ResultMeta,
    roads_path: String,
    accepted: usize,
    excluded: Vec<ExcludedRoad<'a>>,
    manifest_problem: Option<&'a str>,
    traces_checked: usize,
    rejected_traces: Vec<TraceReport>,
}

pub fn validate(cfg: &RunConfig, args: &CorpusArgs) -> Result<u8> {
    let corpus = inputs::load_corpus(args, &cfg.road_checks)?;
    report_exclusions(&corpus);
    let mut rejected = Vec::new();
    let mut checked = 0;
    if corpus.traces_path.is_some() {
        let traces = inputs::traces(&corpus)?;
        let by_id: HashMap<&str, _> = corpus.loaded.roads.iter().map(|g| (g.id(), g)).collect();
        for tr in &traces {
            checked += 1;
            let Some(road) = by_id.get(tr.road_id.as_str()) else {
                eprintln!("  rejected trace {}/{}: unknown road", tr.road_id, tr.agent_id);
                rejected.push(TraceReport {
                    road_id: tr.road_id.clone(),
                    agent_id: tr.agent_id.clone(),
                    flags: vec![],
                    median_hz: None,
                });
                continue;
            };
            let report = validate_trace(tr, road, &cfg.study.trace_checks)?;
            if !report.is_valid() {
                eprintln!("  rejected trace {}/{}: {:?}", tr.road_id, tr.agent_id, report.flags);
                rejected.push(report);
            }
        }
        eprintln!("{checked} traces checked, {} rejected", rejected.len());
    }
    let report = ValidationReport {
        meta: ResultMeta::new(cfg),
        roads_path: corpus.roads_path.display().to_string(),
        accepted: corpus.loaded.roads.len(),
        excluded: corpus
            .loaded
            .excluded
            .iter()
            .map(|(id, reason)| ExcludedRoad { id, reason })
            .collect(),
        manifest_problem: corpus.manifest_problem.as_deref(),
        traces_checked: checked,
        rejected_traces: rejected,
    };
    write_json(&cfg.output_dir.join("validation.json"), &report)?;
    let clean = report.excluded.is_empty() && report.manifest_problem.is_none() && report.rejected_traces.is_empty();
    Ok(if clean { 0 } else { 1 })
}

pub fn synth(cfg: &RunConfig, count: usize, seed: Option<u64>) -> Result<u8> {
    let spec = SynthSpec {
        count,
        seed: seed.unwrap_or(cfg.seed),
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec);
    let manifest = corpus.write(&cfg.output_dir)?;
    eprintln!(
        "wrote {} roads and {} traces to {}",
        manifest.road_count,
        corpus.traces.len(),
        cfg.output_dir.display()
    );
    Ok(0)
}

/// Unrestricted suites plus the shortest and longest length strata. Sizes
/// the (restricted) pool cannot supply are skipped.
fn sample_all(cfg: &RunConfig, corpus: &Corpus) -> Result<Vec<TestSuite>> {
    let pool: Vec<(String, f64)> = corpus
        .loaded
        .roads
        .iter()
        .map(|g| (g.id().to_string(), g.length()))
        .collect();
    let mut out = Vec::new();
    for side in [None, Some(LengthSide::Shortest), Some(LengthSide::Longest)] {
        let mut plan = cfg.plan(side);
        let available = roaddiv::study::eligible_roads(&pool, &plan).len();
        let (kept, skipped): (Vec<usize>, Vec<usize>) = plan.sizes.iter().partition(|&&s| s <= available);
        for s in skipped {
            eprintln!("{}: skipping size {s}, only {available} roads eligible", plan.group());
        }
        if kept.is_empty() {
            continue;
        }
        plan.sizes = kept;
        out.extend(sample_suites(&pool, &plan)?);
    }
    Ok(out)
}

pub fn sample(cfg: &RunConfig, args: &CorpusArgs) -> Result<u8> {
    let corpus = inputs::load_corpus(args, &cfg.road_checks)?;
    report_exclusions(&corpus);
    let suites = sample_all(cfg, &corpus)?;
    let path = cfg.output_dir.join("suites.json");
    inputs::write_suites(&path, &suites, &ResultMeta::new(cfg))?;
    eprintln!("wrote {} suites to {}", suites.len(), path.display());
    Ok(0)
}

fn evaluator(cfg: &RunConfig, corpus: &Corpus, aligned: bool, parallel: bool) -> Result<PoolEvaluator> {
    let mut cat = cfg.catalogue_for(aligned);
    if parallel {
        cat.schedule = Schedule::Parallel;
    }
    let t = Instant::now();
    let ev = PoolEvaluator::new(corpus.loaded.roads.clone(), cat)?;
    eprintln!("pool matrices ({} roads): {:.1}s", ev.len(), t.elapsed().as_secs_f64());
    Ok(ev)
}

pub fn dm(cfg: &RunConfig, args: &CorpusArgs, suites: &Path, parallel: bool) -> Result<u8> {
    let corpus = inputs::load_corpus(args, &cfg.road_checks)?;
    report_exclusions(&corpus);
    let suites = inputs::read_suites(suites)?;
    let meta = ResultMeta::new(cfg);
    for (aligned, name) in cfg.alignment.variants() {
        let ev = evaluator(cfg, &corpus, aligned, parallel)?;
        let table = DmTable::compute(&ev, &suites)?;
        write_dm_table(&cfg.output_dir.join(name).join("dm_table.csv"), &table, &meta)?;
    }
    Ok(0)
}

fn first_suites(suites: &[TestSuite], sizes: &[usize], per_size: usize) -> Vec<TestSuite> {
    sizes
        .iter()
        .flat_map(|&n| {
            suites
                .iter()
                .filter(move |s| s.group == "all" && s.size() == n)
                .take(per_size)
                .cloned()
        })
        .collect()
}

fn size_of(r: &ExperimentRecord) -> &str {
    r.param("size").unwrap_or("?")
}

/// Per-measure counts backing the monotonicity and twin checks.
#[derive(Serialize)]
struct PropertySummary {
    measure: DiversityMeasureId,
    growth_records: usize,
    growth_decreases: usize,
    /// Decreases where neither value came from a time-budgeted search.
    growth_exact_decreases: usize,
    duplicate_records: usize,
    duplicate_max_abs_delta: f64,
    duplicate_max_rel_delta: f64,
}

fn property_summary(records: &[ExperimentRecord]) -> Vec<PropertySummary> {
    DiversityMeasureId::all()
        .into_iter()
        .map(|m| {
            let growth: Vec<_> = records
                .iter()
                .filter(|r| r.measure == m && r.experiment == ExperimentKind::Growth)
                .collect();
            let dup: Vec<_> = records
                .iter()
                .filter(|r| {
                    r.measure == m && r.experiment == ExperimentKind::Duplicates && r.param("mode") == Some("literal")
                })
                .collect();
            let decreased = |r: &&&ExperimentRecord| r.delta.is_some_and(|d| d < 0.0);
            let rel = |r: &ExperimentRecord| match (r.before, r.delta) {
                (Some(b), Some(d)) if b != 0.0 => (d / b).abs(),
                (_, Some(d)) => d.abs(),
                _ => 0.0,
            };
            PropertySummary {
                measure: m,
                growth_records: growth.len(),
                growth_decreases: growth.iter().filter(decreased).count(),
                growth_exact_decreases: growth.iter().filter(decreased).filter(|r| r.exact()).count(),
                duplicate_records: dup.len(),
                duplicate_max_abs_delta: dup.iter().filter_map(|r| r.delta).fold(0.0, |a, d| a.max(d.abs())),
                duplicate_max_rel_delta: dup.iter().map(|r| rel(r)).fold(0.0, f64::max),
            }
        })
        .collect()
}

fn timing_outputs(dir: &Path, records: &[ExperimentRecord], meta: &ResultMeta) -> Result<()> {
    let eff: Vec<_> = records.iter().filter(|r| r.experiment == ExperimentKind::Efficiency).cloned().collect();
    let add: Vec<_> = records.iter().filter(|r| r.experiment == ExperimentKind::Additivity).cloned().collect();
    write_stats(
        &dir.join("efficiency_timing.csv"),
        &summarize(&eff, |r| format!("size={}", size_of(r)), |r| r.wall_time),
        meta,
    )?;
    write_stats(
        &dir.join("additivity_timing.csv"),
        &summarize(
            &add,
            |r| format!("size={};addition={}", size_of(r), r.param("addition").unwrap_or("?")),
            |r| r.timings.get("ratio").copied(),
        ),
        meta,
    )?;
    Ok(())
}

fn bench_records(ev: &PoolEvaluator, cfg: &RunConfig, suites: &[TestSuite]) -> Result<Vec<ExperimentRecord>> {
    let st = &cfg.study;
    let eff = first_suites(suites, &st.efficiency_sizes, st.efficiency_suites_per_size);
    let t = Instant::now();
    let mut records = efficiency_experiment(ev, &eff)?;
    eprintln!("efficiency: {} suites, {:.1}s", eff.len(), t.elapsed().as_secs_f64());
    let add = first_suites(suites, &st.additivity_sizes, st.additivity_suites_per_size);
    let t = Instant::now();
    records.extend(additivity_experiment(ev, &add, &st.additions, cfg.seed)?);
    eprintln!("additivity: {} suites, {:.1}s", add.len(), t.elapsed().as_secs_f64());
    Ok(records)
}

fn rq1(ev: &PoolEvaluator, cfg: &RunConfig, suites: &[TestSuite], dir: &Path, meta: &ResultMeta) -> Result<()> {
    let st = &cfg.study;
    let growth = first_suites(suites, &st.growth_sizes, st.growth_suites_per_size);
    let t = Instant::now();
    let mut records = growth_experiment(ev, &growth, &st.growth_fractions, cfg.seed)?;
    eprintln!("growth: {} suites, {:.1}s", growth.len(), t.elapsed().as_secs_f64());
    let dups = first_suites(suites, &[st.duplicate_size], st.duplicate_suites);
    let t = Instant::now();
    records.extend(duplicate_experiment(ev, &dups, &st.duplicate_fractions, cfg.seed)?);
    eprintln!("duplicates: {} suites, {:.1}s", dups.len(), t.elapsed().as_secs_f64());
    records.extend(bench_records(ev, cfg, suites)?);

    write_records(&dir.join("records.csv"), &records, meta)?;
    let of = |k: ExperimentKind| -> Vec<ExperimentRecord> {
        records.iter().filter(|r| r.experiment == k).cloned().collect()
    };
    write_stats(
        &dir.join("growth_stats.csv"),
        &summarize(
            &of(ExperimentKind::Growth),
            |r| format!("size={};fraction={}", size_of(r), r.param("fraction").unwrap_or("?")),
            |r| r.delta,
        ),
        meta,
    )?;
    write_stats(
        &dir.join("duplicate_stats.csv"),
        &summarize(
            &of(ExperimentKind::Duplicates),
            |r| {
                format!(
                    "mode={};fraction={}",
                    r.param("mode").unwrap_or("?"),
                    r.param("fraction").unwrap_or("?")
                )
            },
            |r| r.delta,
        ),
        meta,
    )?;
    timing_outputs(dir, &records, meta)?;
    write_json(&dir.join("properties.json"), &property_summary(&records))?;
    Ok(())
}

#[derive(Serialize)]
struct AgentSummary {
    agent_id: String,
    roads: usize,
    suites_with_bd: usize,
    degenerate_dimensions: Vec<usize>,
    norms: BehaviorNorms,
}

#[derive(Serialize)]
struct BehaviorSummary {
    meta: ResultMeta,
    agents: Vec<AgentSummary>,
    rejected_traces: Vec<TraceReport>,
}

struct Behavior {
    bd: BTreeMap<String, Vec<BehavioralDiversity>>,
    summary: BehaviorSummary,
}

fn behavior(cfg: &RunConfig, corpus: &Corpus, suites: &[TestSuite]) -> Result<Behavior> {
    let traces = inputs::traces(corpus)?;
    let bc = behavior_features_by_road(&corpus.loaded.roads, &traces, &cfg.study.trace_checks);
    let mut bd = BTreeMap::new();
    let mut agents = Vec::new();
    for (agent, feats) in &bc.features {
        let (values, norms) = suite_behavioral_diversity(&bc, agent, suites, cfg.study.bd_reduction)?;
        agents.push(AgentSummary {
            agent_id: agent.clone(),
            roads: feats.len(),
            suites_with_bd: values.len(),
            degenerate_dimensions: norms.degenerate_dimensions(),
            norms,
        });
        bd.insert(agent.clone(), values);
    }
    eprintln!(
        "behavior: {} agents, {} rejected traces",
        agents.len(),
        bc.rejected.len()
    );
    Ok(Behavior {
        bd,
        summary: BehaviorSummary {
            meta: ResultMeta::new(cfg),
            agents,
            rejected_traces: bc.rejected,
        },
    })
}

fn write_bd(path: &Path, bd: &BTreeMap<String, Vec<BehavioralDiversity>>, meta: &ResultMeta) -> Result<()> {
    let mut w = String::from("agent_id,suite_id,value,seed,config_hash,codec,tool_version\n");
    for values in bd.values() {
        for v in values {
            w.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                v.agent_id, v.suite_id, v.value, meta.seed, meta.config_hash, meta.codec, meta.tool_version
            ));
        }
    }
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
    std::fs::write(path, w).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_corr(dir: &Path, results: &[CorrelationResult], meta: &ResultMeta) -> Result<()> {
    write_correlations(&dir.join("correlations.csv"), &dir.join("correlations.json"), results, meta)?;
    Ok(())
}

fn rows_in_group(table: &DmTable, group: &str) -> DmTable {
    DmTable {
        rows: table.rows.iter().filter(|r| r.group == group).cloned().collect(),
    }
}

pub fn study(
    cfg: &RunConfig,
    args: &CorpusArgs,
    suites: Option<&Path>,
    questions: &[Question],
    parallel: bool,
) -> Result<u8> {
    let started = Instant::now();
    let corpus = inputs::load_corpus(args, &cfg.road_checks)?;
    report_exclusions(&corpus);
    let suites = match suites {
        Some(p) => inputs::read_suites(p)?,
        None => sample_all(cfg, &corpus)?,
    };
    let out = &cfg.output_dir;
    let meta = ResultMeta::new(cfg);
    cfg.save(&out.join("config.json"))?;
    inputs::write_suites(&out.join("suites.json"), &suites, &meta)?;
    let wants = |q: Question| questions.contains(&q);

    let behavior = if wants(Question::Rq4) {
        let b = behavior(cfg, &corpus, &suites)?;
        write_json(&out.join("behavior.json"), &b.summary)?;
        write_bd(&out.join("bd.csv"), &b.bd, &meta)?;
        Some(b)
    } else {
        None
    };

    for (aligned, name) in cfg.alignment.variants() {
        let dir: PathBuf = out.join(name);
        let ev = evaluator(cfg, &corpus, aligned, parallel)?;
        if wants(Question::Rq1) {
            rq1(&ev, cfg, &suites, &dir.join("rq1"), &meta)?;
        }
        if !(wants(Question::Rq2) || wants(Question::Rq3) || wants(Question::Rq4)) {
            continue;
        }
        let t = Instant::now();
        let table = DmTable::compute(&ev, &suites)?;
        eprintln!("catalogue: {} suites, {:.1}s", table.rows.len(), t.elapsed().as_secs_f64());
        write_dm_table(&dir.join("dm_table.csv"), &table, &meta)?;
        let main = rows_in_group(&table, "all");
        if wants(Question::Rq2) {
            let tables = rq2_pairwise_dm_correlation(&main);
            write_corr(&dir.join("rq2"), &correlation_cells(&tables), &meta)?;
        }
        if wants(Question::Rq3) {
            write_corr(&dir.join("rq3"), &rq3_length_effect(&table), &meta)?;
        }
        if let Some(b) = &behavior {
            let mut results = Vec::new();
            for (agent, values) in &b.bd {
                let map: BTreeMap<String, f64> = values.iter().map(|v| (v.suite_id.clone(), v.value)).collect();
                for &mode in &cfg.study.rq4_modes {
                    let source = if mode == Rq4Mode::ByLength { &table } else { &main };
                    results.extend(rq4_dm_bd_correlation(source, &map, agent, mode));
                }
            }
            write_corr(&dir.join("rq4"), &results, &meta)?;
        }
    }
    eprintln!("study finished in {:.1}s", started.elapsed().as_secs_f64());
    Ok(0)
}

pub fn bench(cfg: &RunConfig, args: &CorpusArgs, suites: Option<&Path>, parallel: bool) -> Result<u8> {
    let corpus = inputs::load_corpus(args, &cfg.road_checks)?;
    report_exclusions(&corpus);
    let suites = match suites {
        Some(p) => inputs::read_suites(p)?,
        None => sample_all(cfg, &corpus)?,
    };
    let meta = ResultMeta::new(cfg);
    for (aligned, name) in cfg.alignment.variants() {
        let ev = evaluator(cfg, &corpus, aligned, parallel)?;
        let dir = cfg.output_dir.join(name).join("bench");
        let records = bench_records(&ev, cfg, &suites)?;
        write_records(&dir.join("records.csv"), &records, &meta)?;
        timing_outputs(&dir, &records, &meta)?;
    }
    Ok(0)
}
