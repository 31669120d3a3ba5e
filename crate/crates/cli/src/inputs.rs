use crate::CorpusArgs;
use anyhow::{bail, Context, Result};
use roaddiv::io::{load_roads, load_traces, CorpusManifest, LoadedCorpus, ResultMeta, RoadChecks};
use roaddiv::behavior::SimulationTrace;
use roaddiv::study::TestSuite;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub struct Corpus {
    pub loaded: LoadedCorpus,
    pub roads_path: PathBuf,
    pub traces_path: Option<PathBuf>,
    /// Manifest verification failure, if a manifest was given.
    pub manifest_problem: Option<String>,
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("manifest.json")
    } else {
        p.to_path_buf()
    }
}

pub fn load_corpus(args: &CorpusArgs, checks: &RoadChecks) -> Result<Corpus> {
    let manifest = match &args.corpus {
        Some(p) => {
            let path = manifest_path(p);
            let m = CorpusManifest::read(&path)?;
            Some((m, path))
        }
        None => None,
    };
    let roads_path = match (&args.roads, &manifest) {
        (Some(r), _) => r.clone(),
        (None, Some((m, path))) => m.resolve(path, &m.roads_path),
        (None, None) => bail!("no roads given: pass --corpus or --roads"),
    };
    let traces_path = match (&args.traces, &manifest) {
        (Some(t), _) => Some(t.clone()),
        (None, Some((m, path))) => m.traces_path.as_ref().map(|t| m.resolve(path, t)),
        _ => None,
    };
    let manifest_problem = match &manifest {
        Some((m, path)) if args.roads.is_none() => m.verify(path).err().map(|e| e.to_string()),
        _ => None,
    };
    let loaded = load_roads(&roads_path, checks)?;
    Ok(Corpus {
        loaded,
        roads_path,
        traces_path,
        manifest_problem,
    })
}

pub fn traces(corpus: &Corpus) -> Result<Vec<SimulationTrace>> {
    let Some(path) = &corpus.traces_path else {
        bail!("no traces given: pass --traces or a manifest with a trace table");
    };
    Ok(load_traces(path)?)
}

#[derive(Serialize)]
struct SuiteFileOut<'a> {
    meta: &'a ResultMeta,
    suites: &'a [TestSuite],
}

#[derive(Deserialize)]
struct SuiteFileIn {
    suites: Vec<TestSuite>,
}

pub fn write_suites(path: &Path, suites: &[TestSuite], meta: &ResultMeta) -> Result<()> {
    Ok(roaddiv::io::write_json(path, &SuiteFileOut { meta, suites })?)
}

pub fn read_suites(path: &Path) -> Result<Vec<TestSuite>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SuiteFileIn =
        serde_json::from_str(&text).with_context(|| format!("parsing suites in {}", path.display()))?;
    Ok(file.suites)
}
