use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ptm",
    version,
    about = "Polar template mask encoding and fidelity benchmarking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Template density: 20·m rays per instance.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,

    /// Seed for synthetic rotations and placements and for gradient trials.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Raster grid as WIDTHxHEIGHT. Defaults to each record's image size
    /// (256x256 for synthetic shapes, 768x768 for Airbus CSV).
    #[arg(long, global = true, value_name = "WxH")]
    pub grid: Option<Grid>,

    /// Input format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<InputFormat>,

    /// Output file; standard output when omitted.
    #[arg(short = 'o', long = "output", global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode every instance as a PTM code, one JSON object per line.
    Encode(InputArgs),
    /// Turn JSON-lines PTM codes back into polygons.
    Decode {
        /// Files written by `encode`.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Compare template and uniform sampling at equal ray budget.
    Bench {
        #[command(flatten)]
        input: InputArgs,
        /// Uniform ray count (default 20·m).
        #[arg(long)]
        rays: Option<usize>,
    },
    /// Check analytic polar IoU gradients against central differences.
    Gradcheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
    /// Draw one instance with its rays and reconstructions as SVG.
    Render {
        #[command(flatten)]
        input: InputArgs,
        /// Instance to draw, as `instance_id` or `image_id:instance_id`.
        #[arg(long)]
        instance: Option<String>,
        /// Uniform ray count (default 20·m).
        #[arg(long)]
        rays: Option<usize>,
        /// Leave out the ray layer.
        #[arg(long)]
        no_rays: bool,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Annotation files.
    pub inputs: Vec<PathBuf>,

    /// Generate shapes instead of reading files, e.g. `lens:a=8,b=1,n=100`.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// COCO-style JSON with polygon segmentations.
    Coco,
    /// `ImageId,EncodedPixels` CSV.
    Airbus,
    /// Grayscale image, one instance per nonzero level.
    Mask,
    /// Text file with one synthetic spec per line.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub width: u32,
    pub height: u32,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .ok()
                .filter(|n| (1..=ptm_core::raster::MAX_DIMENSION).contains(n))
                .ok_or_else(|| format!("bad grid dimension {v:?}"))
        };
        Ok(Grid {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}
