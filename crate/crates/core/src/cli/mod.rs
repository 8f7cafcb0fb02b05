//! Command-line front end. Every run writes its outputs, the resolved
//! config and a manifest into one directory.

mod commands;
mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{load_config, Overrides};

use crate::error::{Error, Result};
use crate::figure::{emit_figure, Figure};

pub const USAGE: &str = "\
usage: deepbayes <command> [--config FILE] [--out DIR] [--key value ...]

commands:
  synth                     synthetic users.csv and sessions.csv
  train                     fit the destination ranker, write the NDCG trace
  evaluate                  score a rankings CSV (truth,rank_1,...)
  experiment ball           marginals of uniform draws from high-dimensional balls
  experiment partition      ReLU regions and tree vs network partitions
  experiment dropout-ridge  dropout loss against its g-prior ridge form
  experiment vi-toy         variational fit of a conjugate Gaussian model
  experiment identities     closed-form identity sweep
  experiment optzoo         optimizer descent battery

Flags other than --config and --out set config keys (dashes read as
underscores). Lists are comma separated.
";

/// Output directory of one run.
pub struct RunDir {
    path: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    /// The directory is created on the first write.
    pub fn new(path: impl AsRef<Path>) -> RunDir {
        RunDir {
            path: path.as_ref().to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        std::fs::create_dir_all(&self.path)?;
        std::fs::write(self.path.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `config.resolved.json`.
    pub fn resolved<T: Serialize>(&mut self, command: &str, params: &T) -> Result<()> {
        let doc = serde_json::json!({
            "command": command,
            "out": self.path.display().to_string(),
            "params": params,
        });
        self.write("config.resolved.json", serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// `name.svg` plus its companion `name.csv`.
    pub fn figure(&mut self, name: &str, fig: &Figure) -> Result<()> {
        std::fs::create_dir_all(&self.path)?;
        emit_figure(fig, self.path.join(format!("{name}.svg")))?;
        self.files.push(format!("{name}.svg"));
        self.files.push(format!("{name}.csv"));
        Ok(())
    }

    fn finish(mut self, command: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.path)?;
        #[derive(Serialize)]
        struct Entry {
            name: String,
            bytes: u64,
        }
        self.files.sort();
        self.files.dedup();
        let entries = self
            .files
            .iter()
            .map(|f| {
                Ok(Entry {
                    bytes: std::fs::metadata(self.path.join(f))?.len(),
                    name: f.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = serde_json::json!({ "command": command, "files": entries });
        std::fs::write(self.path.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(self.path)
    }
}

struct Invocation {
    command: String,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    overrides: Overrides,
}

fn parse_args(args: &[String]) -> Result<Invocation> {
    let mut it = args.iter();
    let mut command = it
        .next()
        .ok_or_else(|| Error::Usage("missing command".into()))?
        .clone();
    let mut rest: Vec<&String> = it.collect();
    if command == "experiment" {
        if rest.is_empty() || rest[0].starts_with("--") {
            return Err(Error::Usage("experiment needs a name".into()));
        }
        command = format!("experiment {}", rest.remove(0));
    }
    let mut inv = Invocation {
        command,
        config: None,
        out: None,
        overrides: Overrides::new(),
    };
    let mut i = 0;
    while i < rest.len() {
        let flag = rest[i]
            .strip_prefix("--")
            .ok_or_else(|| Error::Usage(format!("unexpected argument `{}`", rest[i])))?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                i += 1;
                let v = rest.get(i).ok_or_else(|| Error::Usage(format!("flag --{flag} needs a value")))?;
                (flag.to_string(), v.to_string())
            }
        };
        match key.as_str() {
            "config" => inv.config = Some(PathBuf::from(value)),
            "out" => inv.out = Some(PathBuf::from(value)),
            _ => {
                inv.overrides.insert(key.replace('-', "_"), value);
            }
        }
        i += 1;
    }
    Ok(inv)
}

fn execute(args: &[String]) -> Result<()> {
    if args.is_empty() || matches!(args[0].as_str(), "help" | "--help" | "-h") {
        if args.is_empty() {
            return Err(Error::Usage("missing command".into()));
        }
        print!("{USAGE}");
        return Ok(());
    }
    let inv = parse_args(args)?;
    let out = inv
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(inv.command.replace(' ', "-")));
    let cfg = inv.config.as_deref();
    let o = &inv.overrides;
    let run = |dir: RunDir| -> Result<RunDir> {
        let c = inv.command.as_str();
        match c {
            "synth" => commands::synth(c, load_config(cfg, o)?, dir),
            "train" => commands::train(c, load_config(cfg, o)?, dir),
            "evaluate" => commands::evaluate(c, load_config(cfg, o)?, dir),
            "experiment ball" => commands::ball(c, load_config(cfg, o)?, dir),
            "experiment partition" => commands::partition(c, load_config(cfg, o)?, dir),
            "experiment dropout-ridge" => commands::dropout_ridge(c, load_config(cfg, o)?, dir),
            "experiment vi-toy" => commands::vi_toy(c, load_config(cfg, o)?, dir),
            "experiment identities" => commands::identities(c, load_config(cfg, o)?, dir),
            "experiment optzoo" => commands::optzoo(c, load_config(cfg, o)?, dir),
            other => Err(Error::Usage(format!("unknown command `{other}`"))),
        }
    };
    let dir = run(RunDir::new(&out))?;
    let path = dir.finish(&inv.command)?;
    println!("outputs written to {}", path.display());
    Ok(())
}

/// Runs the command line `args` (without the program name) and returns the
/// process exit code: 0 success, 1 usage, 2 data or config, 3 divergence.
pub fn run(args: &[String]) -> i32 {
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 1 {
                eprint!("{USAGE}");
            }
            e.exit_code()
        }
    }
}
