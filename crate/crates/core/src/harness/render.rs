//! Binary PPM/PGM output for REM parameter maps and per-mesh error maps.
//!
//! Images are `m x m` pixels (optionally scaled up by an integer factor),
//! one pixel per mesh, with the top image row showing the highest mesh row.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::deploy::Rem;
use crate::error::{RemError, Result};
use crate::mesh::RegionPartition;
use crate::metrics::assignment_errors;

pub type Rgb = [u8; 3];

/// Reserved color for meshes that received no sensor.
pub const EMPTY_COLOR: Rgb = [255, 0, 0];

/// Fixed 256-entry table indexed by radio parameter plus one reserved
/// "empty" entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    colors: Vec<Rgb>,
    empty: Rgb,
}

const BASE_COLORS: [Rgb; 8] = [
    [16, 24, 96],
    [46, 139, 87],
    [255, 200, 40],
    [70, 160, 230],
    [160, 82, 200],
    [240, 128, 48],
    [120, 200, 200],
    [235, 235, 235],
];

impl Default for Palette {
    fn default() -> Self {
        let mut colors: Vec<Rgb> = BASE_COLORS.to_vec();
        // Remaining entries walk the hue circle by the golden angle.
        for j in 8..256 {
            let hue = (j as f64 * 0.618_033_988_749_895).fract();
            let light = 0.35 + 0.3 * ((j / 8) % 2) as f64;
            let mut c = hsl_to_rgb(hue, 0.55, light);
            if c == EMPTY_COLOR {
                c[1] = 1;
            }
            colors.push(c);
        }
        Palette {
            colors,
            empty: EMPTY_COLOR,
        }
    }
}

impl Palette {
    pub fn color(&self, parameter: u32) -> Rgb {
        self.colors[parameter as usize % self.colors.len()]
    }

    pub fn empty(&self) -> Rgb {
        self.empty
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> Rgb {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to(r), to(g), to(b)]
}

/// Row-major pixels, top row first, one per mesh.
fn mesh_to_image<T: Copy>(side: usize, per_mesh: &[T]) -> Vec<T> {
    (0..side)
        .rev()
        .flat_map(|row| (0..side).map(move |col| row * side + col))
        .map(|i| per_mesh[i])
        .collect()
}

fn upscale<T: Copy>(side: usize, pixels: &[T], scale: usize) -> Vec<T> {
    if scale == 1 {
        return pixels.to_vec();
    }
    let mut out = Vec::with_capacity(pixels.len() * scale * scale);
    for row in 0..side {
        for _ in 0..scale {
            for col in 0..side {
                out.extend(std::iter::repeat_n(pixels[row * side + col], scale));
            }
        }
    }
    out
}

/// Parameter map pixels: palette color per assignment, reserved color for
/// randomly filled meshes.
pub fn parameter_pixels(rem: &Rem, palette: &Palette) -> Vec<Rgb> {
    let per_mesh: Vec<Rgb> = rem
        .assignment()
        .iter()
        .zip(rem.filled_randomly())
        .map(|(&a, &empty)| {
            if empty {
                palette.empty()
            } else {
                palette.color(a)
            }
        })
        .collect();
    mesh_to_image(rem.grid().side(), &per_mesh)
}

/// Error map pixels: `round(255 * (1 - p_{i, j_i}))`.
pub fn error_pixels(rem: &Rem, part: &RegionPartition) -> Result<Vec<u8>> {
    let errs = assignment_errors(part, rem.assignment())?;
    let per_mesh: Vec<u8> = errs
        .iter()
        .map(|e| (e.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    Ok(mesh_to_image(rem.grid().side(), &per_mesh))
}

pub fn write_ppm(path: &Path, width: usize, height: usize, pixels: &[Rgb]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(RemError::domain("pixel buffer does not match image size"));
    }
    let mut buf = format!("P6\n{width} {height}\n255\n").into_bytes();
    buf.extend(pixels.iter().flatten());
    write_bytes(path, &buf)
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(RemError::domain("pixel buffer does not match image size"));
    }
    let mut buf = format!("P5\n{width} {height}\n255\n").into_bytes();
    buf.extend_from_slice(pixels);
    write_bytes(path, &buf)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| RemError::io(path, e))?;
    f.write_all(bytes).map_err(|e| RemError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedRem {
    pub parameter_map: PathBuf,
    pub error_map: PathBuf,
}

/// Writes `<prefix>_map.ppm` and `<prefix>_error.pgm`.
pub fn render_rem(
    rem: &Rem,
    part: &RegionPartition,
    palette: &Palette,
    prefix: &Path,
    scale: usize,
) -> Result<RenderedRem> {
    if scale == 0 {
        return Err(RemError::domain("image scale must be at least 1"));
    }
    let side = rem.grid().side();
    let size = side * scale;
    let with_suffix = |suffix: &str| {
        let mut name = prefix.file_name().unwrap_or_default().to_os_string();
        name.push(suffix);
        prefix.with_file_name(name)
    };
    let parameter_map = with_suffix("_map.ppm");
    let error_map = with_suffix("_error.pgm");
    write_ppm(
        &parameter_map,
        size,
        size,
        &upscale(side, &parameter_pixels(rem, palette), scale),
    )?;
    write_pgm(
        &error_map,
        size,
        size,
        &upscale(side, &error_pixels(rem, part)?, scale),
    )?;
    Ok(RenderedRem {
        parameter_map,
        error_map,
    })
}

/// Minimal reader for the images written above; returns
/// `(magic, width, height, payload)`.
pub fn read_pnm(path: &Path) -> Result<(String, usize, usize, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| RemError::io(path, e))?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(RemError::domain("truncated PNM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| RemError::domain(format!("bad PNM header field '{s}'")))
    };
    let width = parse(&fields[1])?;
    let height = parse(&fields[2])?;
    Ok((fields[0].clone(), width, height, bytes[pos + 1..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{MeshDistribution, MeshGrid};

    #[test]
    fn palette_has_reserved_empty_entry() {
        let p = Palette::default();
        assert_eq!(p.len(), 256);
        assert!((0..256).all(|j| p.color(j) != p.empty()));
        let distinct: std::collections::HashSet<Rgb> = (0..8).map(|j| p.color(j)).collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn image_rows_are_flipped() {
        let grid = MeshGrid::new(1.0, 2).unwrap();
        let rem = Rem::new(grid, vec![0, 1, 2, 3], vec![false, false, false, true]).unwrap();
        let p = Palette::default();
        let px = parameter_pixels(&rem, &p);
        assert_eq!(px, vec![p.color(2), p.empty(), p.color(0), p.color(1)]);
    }

    #[test]
    fn writes_readable_images() {
        let grid = MeshGrid::new(1.0, 2).unwrap();
        let rem = Rem::new(grid, vec![0, 0, 1, 0], vec![false; 4]).unwrap();
        let meshes = vec![
            MeshDistribution::pure(2, 0, 0.25).unwrap(),
            MeshDistribution::new(vec![0.75, 0.25], 0.25).unwrap(),
            MeshDistribution::new(vec![0.5, 0.5], 0.25).unwrap(),
            MeshDistribution::pure(2, 1, 0.25).unwrap(),
        ];
        let part = RegionPartition::new(meshes, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = render_rem(&rem, &part, &Palette::default(), &dir.path().join("rem"), 3).unwrap();
        let (magic, w, h, data) = read_pnm(&out.parameter_map).unwrap();
        assert_eq!((magic.as_str(), w, h, data.len()), ("P6", 6, 6, 108));
        let (magic, w, h, data) = read_pnm(&out.error_map).unwrap();
        assert_eq!((magic.as_str(), w, h), ("P5", 6, 6));
        // Top-left block is mesh 2 (error 0.5), bottom-right is mesh 1 (0.25),
        // top-right is mesh 3 (assigned 0 on a pure-1 mesh).
        assert_eq!(data[0], 128);
        assert_eq!(data[35], 64);
        assert_eq!(data[5], 255);
    }
}
