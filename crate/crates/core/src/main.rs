use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nystrom_coding::coding::{encode, Dictionary, DictionarySource};
use nystrom_coding::data::{
    load_csv, normalize_columns, synth_labeled, synth_manifold, write_csv, LabeledDataset,
};
use nystrom_coding::dictionary::sample_indices;
use nystrom_coding::harness::{
    nystrom_eval, run_curve, run_pdl_compare, write_matrix_csv, ExperimentConfig, OutputFormat,
    Report,
};
use nystrom_coding::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Nystrom view of dictionary feature coding")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Flat JSON config with any experiment parameter.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a labeled synthetic manifold dataset as CSV.
    Synth {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        classes: Option<usize>,
    },
    /// Accuracy versus codebook size with saturation-model predictions.
    Curve {
        /// CSV dataset with trailing labels; synthetic when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// The CSV has one header line.
        #[arg(long)]
        header: bool,
        #[arg(long, value_delimiter = ',')]
        c_grid: Option<Vec<usize>>,
    },
    /// Pooling-aware dictionary learning against its overshoot-1 baseline.
    Pdl {
        #[arg(long, value_delimiter = ',')]
        overshoots: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        final_c: Option<Vec<usize>>,
    },
    /// Nystrom code/kernel errors against the column-sampling bound.
    NystromEval {
        /// CSV dataset; a synthetic manifold when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        /// The CSV rows end in an integer label to be ignored.
        #[arg(long)]
        labeled: bool,
        #[arg(long)]
        header: bool,
        #[arg(long, value_delimiter = ',')]
        c_grid: Option<Vec<usize>>,
    },
    /// Threshold-encode a CSV dataset and write the code matrix as CSV.
    Encode {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labeled: bool,
        #[arg(long)]
        header: bool,
        /// CSV with one atom per row.
        #[arg(long, conflicts_with = "sample")]
        dictionary: Option<PathBuf>,
        /// Use this many uniformly sampled data columns as the dictionary.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| io_err(p, e))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io_err(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn finish(out: &mut dyn Write, res: std::io::Result<()>, path: &Option<PathBuf>) -> Result<()> {
    let target = path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    res.and_then(|_| out.flush()).map_err(|e| io_err(&target, e))
}

fn emit_report<R: Report>(cli: &Cli, report: &R) -> Result<()> {
    let mut out = output(&cli.out)?;
    let res = report.write(&mut *out, cli.format.into());
    finish(&mut *out, res, &cli.out)
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::Synth { d, k, n, noise, classes } => {
            cfg.d = d.unwrap_or(cfg.d);
            cfg.k = k.unwrap_or(cfg.k);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.noise = noise.unwrap_or(cfg.noise);
            cfg.classes = classes.unwrap_or(cfg.classes);
            let ds = synth_labeled(&cfg.synth_spec(), cfg.seed)?;
            let mut out = output(&cli.out)?;
            let res = write_csv(&ds, &mut out);
            finish(&mut *out, res, &cli.out)
        }
        Command::Curve { data, header, c_grid } => {
            if let Some(p) = data {
                cfg.data_path = Some(p.clone());
                cfg.has_labels = true;
                cfg.header = *header;
            }
            if let Some(g) = c_grid {
                cfg.c_grid = g.clone();
            }
            emit_report(cli, &run_curve(&cfg)?)
        }
        Command::Pdl { overshoots, final_c } => {
            if let Some(o) = overshoots {
                cfg.overshoots = o.clone();
            }
            if let Some(f) = final_c {
                cfg.final_c_grid = f.clone();
            }
            emit_report(cli, &run_pdl_compare(&cfg)?)
        }
        Command::NystromEval { data, labeled, header, c_grid } => {
            let x = match data {
                Some(p) => load_csv(p, *labeled, *header)?.data,
                None => synth_manifold(cfg.d, cfg.k, cfg.n, cfg.noise, cfg.seed)?,
            };
            let x = normalize_columns(&x, cfg.normalization).data;
            let grid = c_grid.clone().unwrap_or_else(|| cfg.c_grid.clone());
            let report = nystrom_eval(&x, &grid, &cfg.seeds(), cfg.alpha, cfg.energy, cfg.pinv_tol)?;
            emit_report(cli, &report)
        }
        Command::Encode { data, labeled, header, dictionary, sample, alpha } => {
            let ds = load_csv(data, *labeled, *header)?;
            let x = normalize_columns(&ds.data, cfg.normalization).data;
            let dict = match (dictionary, sample) {
                (Some(p), _) => {
                    let LabeledDataset { data: atoms, .. } = load_csv(p, false, false)?;
                    Dictionary::new(atoms.into_matrix(), DictionarySource::External)?
                }
                (None, Some(c)) => Dictionary::sampled(&x, &sample_indices(x.len(), *c, cfg.seed)?)?,
                (None, None) => {
                    return Err(Error::Argument("encode needs --dictionary or --sample".into()))
                }
            };
            let codes = encode(&x, &dict, alpha.unwrap_or(cfg.alpha))?;
            let mut out = output(&cli.out)?;
            let res = write_matrix_csv(&codes.values, &mut out);
            finish(&mut *out, res, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
