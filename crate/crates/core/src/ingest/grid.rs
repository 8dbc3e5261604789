//! Band rasters, cloud masks, and bilinear resampling.

use super::IngestError;

/// Marker written into pixels whose resampling source falls outside the grid.
pub const NODATA: f64 = f64::NAN;

/// Row-major single-band raster.
#[derive(Debug, Clone, PartialEq)]
pub struct BandGrid {
    width: usize,
    height: usize,
    gsd_m: f64,
    values: Vec<f64>,
}

impl BandGrid {
    pub fn new(width: usize, height: usize, gsd_m: f64, values: Vec<f64>) -> Result<Self, IngestError> {
        if width.checked_mul(height) != Some(values.len()) {
            return Err(IngestError::Grid(format!(
                "{width}x{height} grid needs {} values, got {}",
                width.saturating_mul(height),
                values.len()
            )));
        }
        if !(gsd_m > 0.0 && gsd_m.is_finite()) {
            return Err(IngestError::Grid(format!("gsd must be positive, got {gsd_m}")));
        }
        Ok(Self {
            width,
            height,
            gsd_m,
            values,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        gsd_m: f64,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, IngestError> {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(col, row));
            }
        }
        Self::new(width, height, gsd_m, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gsd_m(&self) -> f64 {
        self.gsd_m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Bilinear sample at fractional grid coordinates where `(col, row)` of
    /// each integer pair is a sample center. `None` when outside the hull
    /// of sample centers.
    pub fn bilinear_at(&self, x: f64, y: f64) -> Option<f64> {
        if self.is_empty() || !x.is_finite() || !y.is_finite() {
            return None;
        }
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if x < 0.0 || y < 0.0 || x > max_x || y > max_y {
            return None;
        }
        let x0 = (x.floor() as usize).min(self.width.saturating_sub(2));
        let y0 = (y.floor() as usize).min(self.height.saturating_sub(2));
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let row = |r: usize| -> f64 {
            let a = self.get(x0, r);
            if fx == 0.0 {
                a
            } else {
                a * (1.0 - fx) + self.get(x0 + 1, r) * fx
            }
        };
        let top = row(y0);
        Some(if fy == 0.0 {
            top
        } else {
            top * (1.0 - fy) + row(y0 + 1) * fy
        })
    }
}

/// Per-pixel cloud flags aligned with a [`BandGrid`]; `true` is cloudy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloudMask {
    width: usize,
    height: usize,
    cloudy: Vec<bool>,
}

impl CloudMask {
    pub fn new(width: usize, height: usize, cloudy: Vec<bool>) -> Result<Self, IngestError> {
        if width.checked_mul(height) != Some(cloudy.len()) {
            return Err(IngestError::Grid(format!(
                "{width}x{height} mask needs {} flags, got {}",
                width.saturating_mul(height),
                cloudy.len()
            )));
        }
        Ok(Self {
            width,
            height,
            cloudy,
        })
    }

    pub fn clear(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cloudy: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_cloudy(&self, pixel_id: usize) -> Option<bool> {
        self.cloudy.get(pixel_id).copied()
    }

    pub fn matches(&self, grid: &BandGrid) -> bool {
        self.width == grid.width && self.height == grid.height
    }
}

/// Resample `grid` at `(x + dx, y + dy)` for every output pixel. Pixels whose
/// source lies outside the grid become [`NODATA`].
pub fn apply_geolocation_shift(grid: &BandGrid, dx: f64, dy: f64) -> Result<BandGrid, IngestError> {
    if grid.is_empty() {
        return Err(IngestError::Grid("cannot shift an empty grid".into()));
    }
    if !(dx.abs() < grid.width as f64 && dy.abs() < grid.height as f64) {
        return Err(IngestError::Grid(format!(
            "shift ({dx}, {dy}) exceeds grid size {}x{}",
            grid.width, grid.height
        )));
    }
    BandGrid::from_fn(grid.width, grid.height, grid.gsd_m, |col, row| {
        grid.bilinear_at(col as f64 + dx, row as f64 + dy)
            .unwrap_or(NODATA)
    })
}

/// Bilinear upsampling by 2 or 4. Output sample `j` reads the source at
/// `j / factor`, so every source sample reappears at `factor · i`; samples
/// past the last source center repeat the edge value.
pub fn upsample_band(grid: &BandGrid, factor: usize) -> Result<BandGrid, IngestError> {
    if factor != 2 && factor != 4 {
        return Err(IngestError::Grid(format!(
            "upsampling factor must be 2 or 4, got {factor}"
        )));
    }
    if grid.is_empty() {
        return Err(IngestError::Grid("cannot upsample an empty grid".into()));
    }
    let f = factor as f64;
    let max_x = (grid.width - 1) as f64;
    let max_y = (grid.height - 1) as f64;
    BandGrid::from_fn(
        grid.width * factor,
        grid.height * factor,
        grid.gsd_m / f,
        |col, row| {
            let x = (col as f64 / f).min(max_x);
            let y = (row as f64 / f).min(max_y);
            grid.bilinear_at(x, y).expect("clamped inside grid")
        },
    )
}

/// Share of `pixels` that are not cloudy in `mask`.
pub fn cloud_free_fraction(pixels: &[usize], mask: &CloudMask) -> Result<f64, IngestError> {
    if pixels.is_empty() {
        return Err(IngestError::Grid("clean pixel set is empty".into()));
    }
    let mut clear = 0usize;
    for &p in pixels {
        match mask.is_cloudy(p) {
            Some(false) => clear += 1,
            Some(true) => {}
            None => {
                return Err(IngestError::Grid(format!(
                    "pixel {p} outside {}x{} mask",
                    mask.width, mask.height
                )))
            }
        }
    }
    Ok(clear as f64 / pixels.len() as f64)
}
