use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mmtopo::demo::rect_holes_image;
use mmtopo::diagram::{bottleneck_distance, close_essential, death_histogram, normalize, parse_pd, serialize_pd};
use mmtopo::filtration::{
    from_nested_sequence, mm_filtration, sublevel_filtration, EntryTimeGrid, FiltrationKind, FiltrationSpec, SeFamily,
};
use mmtopo::image::{add_salt_noise, load_image, serialize_image, sniff_format, threshold, ImageFormat};
use mmtopo::morphology::{close, dilate, erode, open, StructuringElement};
use mmtopo::pipeline::{mm_diagram, pipeline_grayscale, summary_csv, DivisorPolicy, PipelineConfig};
use mmtopo::svg::{emit_svg, SvgData, SvgOptions};
use mmtopo::{build_complex, compute_persistence, BinaryImage, GrayscaleImage, PersistenceDiagram};

#[derive(Parser)]
#[command(name = "mmtopo", version, about = "Persistent homology of images under morphological filtrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one morphological operator to an image.
    Morph {
        #[arg(long, value_enum)]
        op: MorphOp,
        /// `square:N` or `(dx,dy);(dx,dy);...`
        #[arg(long)]
        se: StructuringElement,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an entry-time grid and write it as CSV.
    Filtration {
        #[arg(long)]
        kind: FiltrationKind,
        #[command(flatten)]
        ses: SeArgs,
        #[command(flatten)]
        cap: CapArgs,
        /// Threshold a grayscale input first (black where value <= T).
        #[arg(long)]
        threshold: Option<u32>,
        /// Input image; repeat for the images of an explicit sequence.
        #[arg(long = "in", required = true)]
        input: Vec<PathBuf>,
        /// Filtration values of an explicit sequence (default 0, 1, ...).
        #[arg(long, value_delimiter = ',')]
        values: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the persistence diagram of an entry-time grid.
    Persistence {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        dims: Vec<u8>,
        /// Report essential loops as dying at this level.
        #[arg(long)]
        close_essential: Option<u32>,
    },
    /// Print the bottleneck distance between two diagrams.
    Bottleneck {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        dim: u8,
        /// Divide both diagrams by this value first.
        #[arg(long)]
        normalize: Option<f64>,
    },
    /// Threshold a grayscale image at several levels and compute one
    /// morphological diagram per threshold.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<u32>,
        #[arg(long)]
        kind: FiltrationKind,
        #[command(flatten)]
        ses: SeArgs,
        #[command(flatten)]
        cap: CapArgs,
        /// `auto`, `none`, or a positive number.
        #[arg(long, default_value = "auto")]
        divisor: String,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        dims: Vec<u8>,
        /// Second image processed identically; adds a distance column.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render a diagram as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dimension for histograms; all dimensions otherwise.
        #[arg(long)]
        dim: Option<u8>,
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Add salt noise to a grayscale image.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthetic demonstrations.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Subcommand)]
enum Demo {
    /// Black field with rectangular white holes; erosion filtration with a cap.
    RectHoles {
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        size: usize,
        /// Largest square index (default: widest hole + 1).
        #[arg(long)]
        se_max: Option<u32>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct SeArgs {
    /// Use squares S_2, ..., S_N.
    #[arg(long)]
    se_max: Option<u32>,
    /// Explicit nested elements, in order; overrides --se-max.
    #[arg(long = "se")]
    se: Vec<StructuringElement>,
}

impl SeArgs {
    fn family(&self) -> Result<SeFamily> {
        if !self.se.is_empty() {
            return Ok(SeFamily::Explicit(self.se.clone()));
        }
        match self.se_max {
            Some(n) if n >= 2 => Ok(SeFamily::squares_up_to(n)),
            Some(n) => bail!("--se-max must be at least 2, got {n}"),
            None => bail!("morphological filtrations need --se-max or --se"),
        }
    }
}

#[derive(Args)]
struct CapArgs {
    /// Append an all-black final stage.
    #[arg(long, conflicts_with = "no_cap")]
    cap: bool,
    #[arg(long)]
    no_cap: bool,
}

impl CapArgs {
    fn resolve(&self, kind: FiltrationKind) -> bool {
        if self.cap {
            true
        } else if self.no_cap {
            false
        } else {
            kind.default_cap()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Pd,
    Barcode,
    Hist,
}

fn read_image(path: &Path) -> Result<GrayscaleImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_image(&bytes, sniff_format(&bytes)).with_context(|| format!("parsing {}", path.display()))
}

fn write_image(path: &Path, img: &GrayscaleImage) -> Result<()> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => ImageFormat::CsvGrid,
        _ => ImageFormat::PgmAscii,
    };
    write(path, serialize_image(img, format)?)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_binary(path: &Path, t: Option<u32>) -> Result<BinaryImage> {
    let g = read_image(path)?;
    match t {
        Some(t) => Ok(threshold(&g, t)),
        None => BinaryImage::try_from_gray(&g)
            .with_context(|| format!("{} is not binary; pass --threshold", path.display())),
    }
}

fn read_pd(path: &Path) -> Result<PersistenceDiagram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pd(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_divisor(s: &str) -> Result<DivisorPolicy> {
    Ok(match s {
        "auto" => DivisorPolicy::Auto,
        "none" => DivisorPolicy::None,
        v => DivisorPolicy::Explicit(v.parse().with_context(|| format!("bad divisor {v:?}"))?),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Morph { op, se, input, out } => {
            let f = read_image(&input)?;
            let g = match op {
                MorphOp::Erode => erode(&f, &se),
                MorphOp::Dilate => dilate(&f, &se),
                MorphOp::Open => open(&f, &se),
                MorphOp::Close => close(&f, &se),
            };
            write_image(&out, &g)
        }
        Command::Filtration { kind, ses, cap, threshold: t, input, values, out } => {
            let grid = match kind {
                FiltrationKind::Sublevel => {
                    let [path] = input.as_slice() else { bail!("sublevel filtration takes one --in") };
                    sublevel_filtration(&read_image(path)?)
                }
                FiltrationKind::Explicit => {
                    let images = input.iter().map(|p| read_binary(p, t)).collect::<Result<Vec<_>>>()?;
                    let values = if values.is_empty() { (0..images.len() as u32).collect() } else { values };
                    let grid = from_nested_sequence(&images, &values)?;
                    if cap.cap {
                        grid.capped()
                    } else {
                        grid
                    }
                }
                _ => {
                    let [path] = input.as_slice() else { bail!("{kind} filtration takes one --in") };
                    let spec = FiltrationSpec::new(kind, ses.family()?).with_cap(cap.resolve(kind));
                    mm_filtration(&read_binary(path, t)?, &spec)?
                }
            };
            write(&out, grid.to_csv())
        }
        Command::Persistence { grid, out, dims, close_essential: level } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let grid = EntryTimeGrid::from_csv(&text)?;
            let mut pd = compute_persistence(&build_complex(&grid))?;
            if let Some(level) = level {
                pd = close_essential(&pd, 1, level as f64);
            }
            write(&out, serialize_pd(&pd.restrict_dims(&dims)))
        }
        Command::Bottleneck { a, b, dim, normalize: divisor } => {
            let (mut pa, mut pb) = (read_pd(&a)?, read_pd(&b)?);
            if let Some(d) = divisor {
                pa = normalize(&pa, d)?;
                pb = normalize(&pb, d)?;
            }
            println!("{}", bottleneck_distance(&pa, &pb, dim)?);
            Ok(())
        }
        Command::Pipeline { input, thresholds, kind, ses, cap, divisor, dims, compare, out_dir } => {
            let f = read_image(&input)?;
            let spec = FiltrationSpec::new(kind, ses.family()?).with_cap(cap.resolve(kind));
            let cfg = PipelineConfig { thresholds, spec, divisor: parse_divisor(&divisor)?, dims };
            let runs = pipeline_grayscale(&f, &cfg)?;
            let other = compare.map(|p| read_image(&p).and_then(|g| Ok(pipeline_grayscale(&g, &cfg)?))).transpose()?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (t, pd) in &runs {
                write(&out_dir.join(format!("pd_t{t}.json")), serialize_pd(pd))?;
            }
            if let Some(other) = &other {
                for (t, pd) in other {
                    write(&out_dir.join(format!("pd_compare_t{t}.json")), serialize_pd(pd))?;
                }
            }
            let summary = summary_csv(&runs, &cfg.dims, other.as_deref())?;
            write(&out_dir.join("summary.csv"), &summary)?;
            print!("{summary}");
            Ok(())
        }
        Command::Plot { kind, input, out, dim, bin_width, title } => {
            let pd = read_pd(&input)?;
            let pd = match dim {
                Some(d) => pd.restrict_dims(&[d]),
                None => pd,
            };
            let opts = SvgOptions { title, ..SvgOptions::default() };
            let svg = match kind {
                PlotKind::Pd => emit_svg(SvgData::Diagram(&pd), &opts),
                PlotKind::Barcode => emit_svg(SvgData::Barcode(&pd), &opts),
                PlotKind::Hist => {
                    if !(bin_width > 0.0) {
                        bail!("--bin-width must be positive");
                    }
                    let h = death_histogram(&pd, dim.unwrap_or(1), bin_width);
                    emit_svg(SvgData::Histogram(&h), &opts)
                }
            };
            write(&out, svg)
        }
        Command::Noise { input, out, fraction, seed } => {
            if !(0.0..=1.0).contains(&fraction) {
                bail!("--fraction must lie in [0, 1]");
            }
            write_image(&out, &add_salt_noise(&read_image(&input)?, fraction, seed))
        }
        Command::Demo(Demo::RectHoles { widths, size, se_max, out_dir }) => {
            let img = rect_holes_image(size, &widths)?;
            let se_max = se_max.unwrap_or(*widths.iter().max().unwrap() as u32 + 1).max(2);
            let spec = FiltrationSpec::new(FiltrationKind::Erosion, SeFamily::squares_up_to(se_max));
            let grid = mm_filtration(&img, &spec)?;
            let pd = mm_diagram(&img, &spec)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            write_image(&out_dir.join("image.pgm"), &GrayscaleImage::from_binary(&img))?;
            write(&out_dir.join("grid.csv"), grid.to_csv())?;
            write(&out_dir.join("pd.json"), serialize_pd(&pd))?;
            let pd1 = pd.restrict_dims(&[1]);
            let opts = SvgOptions { title: "erosion filtration, H1".into(), ..SvgOptions::default() };
            write(&out_dir.join("pd1.svg"), emit_svg(SvgData::Diagram(&pd1), &opts))?;
            for i in pd1.intervals() {
                println!("{} {} {}", i.dim, i.birth, i.death);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
