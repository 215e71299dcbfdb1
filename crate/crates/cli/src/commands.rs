// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use hyperflow::annotate::{annotate_graph, AnnotateError};
use hyperflow::export::{self, ExportFilter, GraphFileError};
use hyperflow::graph::GraphError;
use hyperflow::metrics::MetricError;
use hyperflow::property::{generate_ift_properties, AssetConfig, ConfigError, PropertyError};
use hyperflow::report::{self, ReportOptions};
use hyperflow::rtl::{ElaborationError, FrontendError};
use hyperflow::sim::{self, SimError, SimOptions, Stimulus, StimulusError, TaintMode};
use hyperflow::vcd::{self, VcdError};
use hyperflow::{BuildError, HyperflowGraph, SourceUnit};
use thiserror::Error;

use crate::{Cli, Command, DesignArgs, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Elaboration(#[from] ElaborationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("asset `{asset}`: {source}")]
    Property { asset: String, source: PropertyError },
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("{path}: {source}")]
    Vcd { path: String, source: VcdError },
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error("{path}: {source}")]
    GraphFile { path: String, source: GraphFileError },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Frontend(_) => 4,
            CliError::Elaboration(_) | CliError::Graph(_) => 5,
            CliError::Config(_) | CliError::Property { .. } => 6,
            CliError::Stimulus(_) => 7,
            CliError::Simulation(_) => 8,
            CliError::Vcd { .. } => 9,
            CliError::Annotate(_) => 10,
            CliError::GraphFile { .. } => 11,
            CliError::Metric(_) => 12,
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Frontend(e) => CliError::Frontend(e),
            BuildError::Elaboration(e) => CliError::Elaboration(e),
            BuildError::Graph(e) => CliError::Graph(e),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_design(d: &DesignArgs) -> Result<(hyperflow::ElaboratedDesign, HyperflowGraph), CliError> {
    let mut files = Vec::new();
    for f in &d.files {
        files.push((f.display().to_string(), read(f)?));
    }
    let src = SourceUnit {
        files,
        top_module: d.top.clone(),
    };
    Ok(hyperflow::build(&src)?)
}

fn load_graph(path: &Path) -> Result<HyperflowGraph, CliError> {
    export::read_graph(&read(path)?).map_err(|source| CliError::GraphFile {
        path: path.display().to_string(),
        source,
    })
}

fn load_vcd(path: &Path) -> Result<vcd::Waveform, CliError> {
    vcd::parse_vcd(&read(path)?).map_err(|source| CliError::Vcd {
        path: path.display().to_string(),
        source,
    })
}

fn resolve(g: &HyperflowGraph, name: &str) -> Result<hyperflow::SignalId, CliError> {
    g.lookup(name)
        .ok_or_else(|| CliError::Metric(MetricError::UnknownSignal(name.to_string())))
}

fn file_label(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let include_clocked = cli.include_clocked;
    match cli.command {
        Command::Build { design, out } => {
            let (_, g) = load_design(&design)?;
            emit(out.as_deref(), &export::write_graph(&g))
        }
        Command::Simulate {
            design,
            assets,
            stimulus,
            out_dir,
            precise,
        } => simulate(&design, &assets, &stimulus, &out_dir, precise),
        Command::Annotate {
            graph,
            func,
            taint,
            out,
        } => {
            let g = load_graph(&graph)?;
            let f = load_vcd(&func)?;
            let t = load_vcd(&taint)?;
            let id = format!("{}+{}", file_label(&func), file_label(&taint));
            let (a, warnings) = annotate_graph(&g, &f, &t, &id)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            emit(out.as_deref(), &export::write_graph(&a))
        }
        Command::Report {
            graph,
            asset,
            targets,
            all_outputs,
            windows,
            spm_time,
            max_paths,
            json,
            out,
        } => {
            let g = load_graph(&graph)?;
            let a = resolve(&g, &asset)?;
            let targets = if all_outputs {
                g.outputs()
            } else {
                targets
                    .iter()
                    .map(|t| resolve(&g, t))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let opts = ReportOptions {
                fractions: windows.iter().map(|w| w / 100.0).collect(),
                include_clocked,
                max_paths,
                spm_time,
                ..Default::default()
            };
            let rows = report::report(&g, a, &targets, &opts)?;
            let text = if json {
                report::render_json(&rows)
            } else {
                report::render_table(&rows)
            };
            emit(out.as_deref(), &text)
        }
        Command::Export {
            graph,
            format,
            explicit_only,
            implicit_only,
            path,
            out,
        } => {
            let g = load_graph(&graph)?;
            let path = match path.as_deref() {
                Some([a, b]) => Some((resolve(&g, a)?, resolve(&g, b)?)),
                _ => None,
            };
            let view = export::select(
                &g,
                &ExportFilter {
                    explicit_only,
                    implicit_only,
                    include_clocked,
                    path,
                },
            )?;
            let text = match format {
                Format::Dot => export::to_dot(&g, &view),
                Format::Elements => {
                    serde_json::to_string_pretty(&export::to_elements(&g, &view)).expect("json") + "\n"
                }
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn simulate(design: &DesignArgs, assets: &Path, stimulus: &Path, out_dir: &PathBuf, precise: bool) -> Result<(), CliError> {
    let (d, _) = load_design(design)?;
    let names: Vec<String> = d.signals.iter().map(|s| s.name.clone()).collect();
    let apath = assets.display().to_string();
    let specs = AssetConfig::parse(&apath, &read(assets)?)?.resolve(&apath, &d.top, &names)?;
    let stim = Stimulus::parse(&stimulus.display().to_string(), &read(stimulus)?)?;
    let opts = SimOptions {
        mode: if precise {
            TaintMode::Precise
        } else {
            TaintMode::Conservative
        },
    };
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let all: BTreeSet<_> = d.ids().collect();
    let mut func_written = false;
    let mut index = 0usize;
    for spec in &specs {
        let asset = d.signal(spec.asset).name.clone();
        let props = generate_ift_properties(spec, &all).map_err(|source| CliError::Property {
            asset: asset.clone(),
            source,
        })?;
        for p in props {
            let trace = sim::simulate_with(&d, &p, &stim, opts)?;
            let (f, t) = vcd::from_trace(&trace, "1ns");
            if !func_written {
                let fp = out_dir.join("func.vcd");
                write(&fp, &vcd::write_vcd(&f))?;
                println!("{}", fp.display());
                func_written = true;
            }
            let short = asset.strip_prefix(&format!("{}/", d.top)).unwrap_or(&asset);
            let objective = serde_json::to_value(p.objective)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let tp = out_dir.join(format!("taint_{index}_{}_{objective}.vcd", sanitize(short)));
            write(&tp, &vcd::write_vcd(&t))?;
            println!("{}", tp.display());
            let name = |s| d.signal(s).name.clone();
            let violations = sim::check_property(&trace, &p);
            eprintln!(
                "property {}: {} violating sink bit(s)",
                p.render(&name),
                violations.len()
            );
            index += 1;
        }
    }
    Ok(())
}
