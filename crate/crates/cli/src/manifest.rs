use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkernel::bench::Dataset;
use walkernel::graph::io::{to_edge_list, to_json};
use walkernel::graph::{random_graph_set1, random_graph_set2, Graph, RngSeed};

use crate::CliError;

pub const MANIFEST_FORMAT: &str = "walkernel-manifest";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Set1,
    Set2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Json,
    Edgelist,
}

impl GraphFormat {
    fn extension(self) -> &'static str {
        match self {
            GraphFormat::Json => "json",
            GraphFormat::Edgelist => "txt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub n: usize,
    pub fill: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub set: SetKind,
    pub seed: u64,
    pub per_cell: usize,
    pub graph_format: GraphFormat,
    pub graphs: Vec<ManifestEntry>,
}

impl Manifest {
    /// Plans the files of a dataset; graph seeds follow [`Dataset::generate`].
    pub fn plan(set: SetKind, dataset: &Dataset, per_cell: usize, seed: RngSeed, graph_format: GraphFormat) -> Self {
        let mut graphs = Vec::new();
        for (c, (n, fill)) in dataset.cells().into_iter().enumerate() {
            let cell_seed = seed.derive(c as u64);
            for i in 0..per_cell {
                let file = match fill {
                    Some(f) => format!("set2_n{n}_fill{f}_{i:02}.{}", graph_format.extension()),
                    None => format!("set1_n{n}_{i:02}.{}", graph_format.extension()),
                };
                graphs.push(ManifestEntry { file, n, fill, seed: cell_seed.derive(i as u64).0 });
            }
        }
        Manifest { format: MANIFEST_FORMAT.into(), version: 1, set, seed: seed.0, per_cell, graph_format, graphs }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let m: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::usage(format!("{}: not a {MANIFEST_FORMAT} file", path.display())));
        }
        Ok(m)
    }

    pub fn entry_graph(&self, e: &ManifestEntry) -> Result<Graph, CliError> {
        let seed = RngSeed(e.seed);
        let g = match (self.set, e.fill) {
            (SetKind::Set1, _) => {
                if !e.n.is_power_of_two() {
                    return Err(CliError::usage(format!("{}: set1 sizes must be powers of two", e.file)));
                }
                random_graph_set1(e.n.trailing_zeros(), seed)
            }
            (SetKind::Set2, Some(f)) => random_graph_set2(e.n, f, seed),
            (SetKind::Set2, None) => return Err(CliError::usage(format!("{}: set2 entry without fill", e.file))),
        };
        g.map_err(CliError::from)
    }

    /// Writes every graph and the manifest itself into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for e in &self.graphs {
            let g = self.entry_graph(e)?;
            let text = match self.graph_format {
                GraphFormat::Json => to_json(&g),
                GraphFormat::Edgelist => to_edge_list(&g)?,
            };
            let path = dir.join(&e.file);
            std::fs::write(&path, text).map_err(|err| CliError::io(&path, err))?;
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
