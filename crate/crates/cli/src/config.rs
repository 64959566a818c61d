use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use surfq_core::quantize::{default_ladder, DEFAULT_SPECTRUM_TOLERANCE};
use surfq_core::{ImplicitSurface, PhysicalConstants, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Cylinder,
    Torus,
    Ellipsoid,
    Plane,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Cylinder => "cylinder",
            Self::Torus => "torus",
            Self::Ellipsoid => "ellipsoid",
            Self::Plane => "plane",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Surface to use.
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceKind>,
    /// Sphere or cylinder radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Torus major radius.
    #[arg(long = "R", id = "major")]
    pub major: Option<f64>,
    /// Torus minor radius.
    #[arg(long = "r", id = "minor")]
    pub minor: Option<f64>,
    /// Ellipsoid semi-axes.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Cylinder length.
    #[arg(long)]
    pub length: Option<f64>,
    /// Plane side lengths.
    #[arg(long)]
    pub lx: Option<f64>,
    #[arg(long)]
    pub ly: Option<f64>,
    /// Translate the surface to `x,y,z`.
    #[arg(long, value_parser = parse_center)]
    pub center: Option<[f64; 3]>,
    /// Use the level function with the opposite sign.
    #[arg(long)]
    pub flip: bool,
    /// Grid size `NxM`; repeat to form a ladder.
    #[arg(long = "grid", value_parser = parse_grid)]
    pub grids: Vec<(usize, usize)>,
    /// Phase-space sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bracket tolerance or eigensolver residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of eigenvalues.
    #[arg(long)]
    pub k: Option<usize>,
    /// Leave the geometric potential out of the Hamiltonian.
    #[arg(long)]
    pub no_geometric_potential: bool,
    /// Run each potential-sensitive identity with and without the geometric
    /// potential.
    #[arg(long)]
    pub discriminator: bool,
    /// Restrict verify-quantum to these identity ids.
    #[arg(long = "identity")]
    pub identities: Vec<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format written to standard output.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// Plain-text `key=value` file; flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("grid dimensions must be positive integers, got `{s}`"))
    };
    Ok((parse(n)?, parse(m)?))
}

pub fn parse_center(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let values: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
    match values[..] {
        [x, y, z] if parts.len() == 3 && values.iter().all(|v| v.is_finite()) => Ok([x, y, z]),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

type Named<T> = Vec<(&'static str, T)>;

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub surface: SurfaceKind,
    pub parameters: BTreeMap<String, f64>,
    pub center: [f64; 3],
    pub flipped: bool,
    pub grids: Vec<(usize, usize)>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub k: usize,
    pub include_geometric_potential: bool,
    pub discriminator: bool,
    pub identities: Vec<String>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    pub threads: usize,
    pub constants: PhysicalConstants,
    #[serde(skip)]
    pub explicit_grids: bool,
}

struct FileValues {
    path: PathBuf,
    values: BTreeMap<String, Vec<String>>,
}

impl FileValues {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            values
                .entry(key.trim().trim_start_matches("--").to_string())
                .or_default()
                .push(value.trim().to_string());
        }
        Ok(Self {
            path: path.to_path_buf(),
            values,
        })
    }

    fn empty() -> Self {
        Self {
            path: PathBuf::new(),
            values: BTreeMap::new(),
        }
    }

    fn take_all(&mut self, key: &str) -> Vec<String> {
        self.values.remove(key).unwrap_or_default()
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let mut all = self.take_all(key);
        ensure!(all.len() <= 1, "{}: key `{key}` given more than once", self.path.display());
        match all.pop() {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| anyhow::anyhow!("{}: invalid value `{v}` for `{key}`", self.path.display())),
        }
    }

    fn take_with<T>(&mut self, key: &str, parse: fn(&str) -> Result<T, String>) -> Result<Vec<T>> {
        let path = self.path.display().to_string();
        self.take_all(key)
            .iter()
            .flat_map(|v| v.split(',').map(str::to_string).collect::<Vec<_>>())
            .map(|v| parse(v.trim()).map_err(|e| anyhow::anyhow!("{path}: {e}")))
            .collect()
    }

    fn take_enum<T: ValueEnum>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take::<String>(key)? {
            None => Ok(None),
            Some(v) => T::from_str(&v, true)
                .map(Some)
                .map_err(|_| anyhow::anyhow!("{}: invalid value `{v}` for `{key}`", self.path.display())),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            bail!("{}: unknown key `{key}`", self.path.display());
        }
        Ok(())
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    ensure!(value.is_finite() && value > 0.0, "--{name} must be a positive number, got {value}");
    Ok(value)
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<Self> {
        let mut file = match &args.config {
            Some(path) => FileValues::load(path)?,
            None => FileValues::empty(),
        };
        let surface = match args.surface {
            Some(s) => Some(s),
            None => file.take_enum("surface")?,
        }
        .unwrap_or(SurfaceKind::Sphere);
        file.values.remove("surface");

        let mut number = |cli: Option<f64>, key: &str| -> Result<Option<f64>> {
            let from_file = file.take::<f64>(key)?;
            Ok(cli.or(from_file))
        };
        let radius = number(args.radius, "radius")?;
        let major = number(args.major, "R")?;
        let minor = number(args.minor, "r")?;
        let a = number(args.a, "a")?;
        let b = number(args.b, "b")?;
        let c = number(args.c, "c")?;
        let length = number(args.length, "length")?;
        let lx = number(args.lx, "lx")?;
        let ly = number(args.ly, "ly")?;
        let tol = number(args.tol, "tol")?;
        let hbar = number(args.hbar, "hbar")?;
        let mass = number(args.mass, "mass")?;

        let (parameters, unused): (Named<f64>, Named<Option<f64>>) = match surface {
            SurfaceKind::Sphere => (
                vec![("radius", radius.unwrap_or(1.0))],
                vec![("R", major), ("r", minor), ("a", a), ("b", b), ("c", c), ("length", length), ("lx", lx), ("ly", ly)],
            ),
            SurfaceKind::Cylinder => (
                vec![("radius", radius.unwrap_or(1.0)), ("length", length.unwrap_or(2.0 * PI))],
                vec![("R", major), ("r", minor), ("a", a), ("b", b), ("c", c), ("lx", lx), ("ly", ly)],
            ),
            SurfaceKind::Torus => (
                vec![("R", major.unwrap_or(2.0)), ("r", minor.unwrap_or(0.5))],
                vec![("radius", radius), ("a", a), ("b", b), ("c", c), ("length", length), ("lx", lx), ("ly", ly)],
            ),
            SurfaceKind::Ellipsoid => (
                vec![("a", a.unwrap_or(2.0)), ("b", b.unwrap_or(1.5)), ("c", c.unwrap_or(1.0))],
                vec![("radius", radius), ("R", major), ("r", minor), ("length", length), ("lx", lx), ("ly", ly)],
            ),
            SurfaceKind::Plane => (
                vec![("lx", lx.unwrap_or(2.0 * PI)), ("ly", ly.unwrap_or(2.0 * PI))],
                vec![("radius", radius), ("R", major), ("r", minor), ("a", a), ("b", b), ("c", c), ("length", length)],
            ),
        };
        if let Some((name, _)) = unused.iter().find(|(_, v)| v.is_some()) {
            bail!("--{name} does not apply to a {} surface", surface.name());
        }
        for (name, value) in &parameters {
            positive(name, *value)?;
        }

        let center = match args.center {
            Some(c) => Some(c),
            None => file.take_with("center", |s| s.parse::<f64>().map_err(|e| e.to_string()))?
                .try_into()
                .map(Some)
                .or_else(|v: Vec<f64>| {
                    if v.is_empty() {
                        Ok(None)
                    } else {
                        Err(anyhow::anyhow!("center needs three values, got {}", v.len()))
                    }
                })?,
        }
        .unwrap_or([0.0; 3]);
        ensure!(center.iter().all(|v| v.is_finite()), "--center must be finite");

        let file_grids = file.take_with("grid", parse_grid)?;
        let explicit_grids = !args.grids.is_empty() || !file_grids.is_empty();
        let grids = if args.grids.is_empty() { file_grids } else { args.grids };

        let flag = |cli: bool, file: &mut FileValues, key: &str| -> Result<bool> {
            Ok(cli || file.take::<bool>(key)?.unwrap_or(false))
        };
        let flipped = flag(args.flip, &mut file, "flip")?;
        let no_vg = flag(args.no_geometric_potential, &mut file, "no-geometric-potential")?;
        let discriminator = flag(args.discriminator, &mut file, "discriminator")?;

        let samples = args.samples.or(file.take("samples")?).unwrap_or(1000);
        ensure!(samples > 0, "--samples must be at least 1");
        let seed = args.seed.or(file.take("seed")?).unwrap_or(1);
        let k = args.k.or(file.take("k")?).unwrap_or(9);
        ensure!(k > 0, "--k must be at least 1");
        let threads = args.threads.or(file.take("threads")?).unwrap_or(1);
        ensure!(threads > 0, "--threads must be at least 1");
        let tolerance = positive("tol", tol.unwrap_or(DEFAULT_SPECTRUM_TOLERANCE))?;
        let file_ids = file.take_with("identity", |s| Ok(s.to_string()))?;
        let identities = if args.identities.is_empty() { file_ids } else { args.identities };
        let out = args.out.or(file.take("out")?);
        let format = match args.format {
            Some(f) => f,
            None => file.take_enum("format")?.unwrap_or(Format::Table),
        };
        let constants = PhysicalConstants::new(hbar.unwrap_or(1.0), mass.unwrap_or(1.0))?;
        file.finish()?;

        let mut config = Self {
            surface,
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            center,
            flipped,
            grids,
            samples,
            seed,
            tolerance,
            k,
            include_geometric_potential: !no_vg,
            discriminator,
            identities,
            out,
            format,
            threads,
            constants,
            explicit_grids,
        };
        if !config.explicit_grids {
            config.grids = default_ladder(&config.build_surface()?);
        }
        Ok(config)
    }

    fn parameter(&self, name: &str) -> f64 {
        self.parameters[name]
    }

    pub fn build_surface(&self) -> Result<ImplicitSurface> {
        let p = |n| self.parameter(n);
        let mut surface = match self.surface {
            SurfaceKind::Sphere => ImplicitSurface::sphere(p("radius")),
            SurfaceKind::Cylinder => ImplicitSurface::cylinder(p("radius"), p("length")),
            SurfaceKind::Torus => ImplicitSurface::torus(p("R"), p("r")),
            SurfaceKind::Ellipsoid => ImplicitSurface::ellipsoid(p("a"), p("b"), p("c")),
            SurfaceKind::Plane => ImplicitSurface::plane(p("lx"), p("ly")),
        }?;
        let [x, y, z] = self.center;
        if self.center != [0.0; 3] {
            surface = surface.with_center(Vec3::new(x, y, z));
        }
        if self.flipped {
            surface = surface.flipped();
        }
        Ok(surface)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("16x32"), Ok((16, 32)));
        assert_eq!(parse_grid("8X8"), Ok((8, 8)));
        assert!(parse_grid("0x8").is_err());
        assert!(parse_grid("16").is_err());
        assert!(parse_grid("ax3").is_err());
    }

    #[test]
    fn center_syntax() {
        assert_eq!(parse_center("0.7, 0.4,0.3"), Ok([0.7, 0.4, 0.3]));
        assert!(parse_center("1,2").is_err());
        assert!(parse_center("1,2,nan").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("surfq-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "# run\nsurface = torus\nR = 3\nr=1\nseed=7\ngrid=8x8\ngrid=16x16\n").unwrap();
        let args = RunArgs {
            config: Some(path.clone()),
            seed: Some(9),
            ..RunArgs::default()
        };
        let config = RunConfig::resolve(args).unwrap();
        assert_eq!(config.surface, SurfaceKind::Torus);
        assert_eq!(config.parameter("R"), 3.0);
        assert_eq!(config.seed, 9);
        assert_eq!(config.grids, vec![(8, 8), (16, 16)]);
        fs::write(&path, "colour=blue\n").unwrap();
        let err = RunConfig::resolve(RunArgs {
            config: Some(path),
            ..RunArgs::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn rejects_foreign_parameters() {
        let args = RunArgs {
            surface: Some(SurfaceKind::Sphere),
            major: Some(2.0),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(args).is_err());
        let args = RunArgs {
            radius: Some(-1.0),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(args).is_err());
    }
}
