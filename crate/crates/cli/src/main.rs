//! `boundline`: run each step-I stage, the whole chain, the assessment or
//! the HTTP service from the command line.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_IO: u8 = 2;
pub const EXIT_PARAMS: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "boundline", version, about = "Boundary delineation from georeferenced orthoimages")]
struct Cli {
    /// Log as one JSON object per line.
    #[arg(long, global = true)]
    json_logs: bool,
    /// More output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ImageArgs {
    image: PathBuf,
    /// Defaults to the sidecar world file next to the image.
    worldfile: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct CueArgs {
    /// Base parameters as JSON; flags below override it.
    #[arg(long)]
    cue_params: Option<PathBuf>,
    /// Binary boundary threshold on the hierarchical strength.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    no_spectral: bool,
    #[arg(long)]
    no_texture: bool,
    #[arg(long)]
    orientations: Option<usize>,
    /// Half-disc radii in pixels, comma separated.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    /// Largest dimension for contour detection.
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct SlicArgs {
    /// Seed spacing S in pixels (default: one meter).
    #[arg(long)]
    region_size: Option<usize>,
    #[arg(long)]
    compactness: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    min_region_size: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Contour detection: gPb map, binary boundary map and outlines.
    Contours {
        #[command(flatten)]
        io: ImageArgs,
        #[command(flatten)]
        cue: CueArgs,
    },
    /// SLIC superpixels: label map and outlines.
    Slic {
        #[command(flatten)]
        io: ImageArgs,
        #[command(flatten)]
        slic: SlicArgs,
    },
    /// Keep SLIC outlines near gPb outlines, clean them and build the network.
    Combine {
        #[arg(long)]
        slic: PathBuf,
        #[arg(long)]
        gpb: PathBuf,
        /// Buffer radius in meters.
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        /// Pixel size the layers were derived at; sets the cleaning defaults.
        #[arg(long, default_value_t = 0.05)]
        gsd: f64,
        #[arg(long)]
        snap_tol: Option<f64>,
        #[arg(long)]
        min_dangle: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Whole step-I chain from an image to the network.
    Network {
        #[command(flatten)]
        io: ImageArgs,
        #[command(flatten)]
        cue: CueArgs,
        #[command(flatten)]
        slic: SlicArgs,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
    },
    /// Localization accuracy of delineated lines against reference lines.
    Assess {
        #[arg(long)]
        delineated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        gsd: f64,
        /// Buffer distances in meters, comma separated.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Session storage; falls back to $BOUNDLINE_DATA_DIR.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn init_logging(json: bool, verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let mut b = env_logger::Builder::new();
    b.filter_level(level).parse_default_env();
    if json {
        b.format(|buf, rec| {
            let line = serde_json::json!({
                "ts": buf.timestamp_millis().to_string(),
                "level": rec.level().as_str(),
                "target": rec.target(),
                "msg": rec.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    b.init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAMS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.json_logs, cli.verbose);
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
