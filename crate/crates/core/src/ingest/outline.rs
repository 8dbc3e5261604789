//! Lake outlines and clean-pixel extraction.

use std::path::Path;

use super::{BandGrid, IngestError};

const BOUNDARY_EPS: f64 = 1e-9;

/// Closed, simple polygon in grid-pixel units. Cell `(col, row)` covers
/// `[col, col + 1] x [row, row + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LakeOutline {
    vertices: Vec<(f64, f64)>,
}

impl LakeOutline {
    /// Builds a ring from its vertices. A repeated closing vertex is dropped.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Self, IngestError> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(IngestError::Outline(format!(
                "outline needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(IngestError::Outline("non-finite vertex".into()));
        }
        let outline = Self { vertices };
        if outline.signed_area().abs() < 1e-12 {
            return Err(IngestError::Outline("outline has zero area".into()));
        }
        if let Some((i, j)) = outline.first_self_intersection() {
            return Err(IngestError::Outline(format!(
                "outline edges {i} and {j} intersect"
            )));
        }
        Ok(outline)
    }

    /// One `x y` pair per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut vertices = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64, IngestError> {
                s.and_then(|v| v.parse().ok()).ok_or_else(|| IngestError::Row {
                    line: n + 1,
                    message: format!("expected `x y`, got {line:?}"),
                })
            };
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(IngestError::Row {
                    line: n + 1,
                    message: format!("expected `x y`, got {line:?}"),
                });
            }
            vertices.push((x, y));
        }
        Self::new(vertices)
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    pub fn signed_area(&self) -> f64 {
        self.edges()
            .map(|((x0, y0), (x1, y1))| x0 * y1 - x1 * y0)
            .sum::<f64>()
            / 2.0
    }

    fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(edges[i], edges[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn on_boundary(&self, p: (f64, f64)) -> bool {
        self.edges().any(|e| point_on_segment(p, e))
    }

    /// Even-odd containment of points off the boundary.
    pub fn contains_strict(&self, p: (f64, f64)) -> bool {
        if self.on_boundary(p) {
            return false;
        }
        let (px, py) = p;
        let mut inside = false;
        for ((x0, y0), (x1, y1)) in self.edges() {
            if (y0 > py) != (y1 > py) {
                let x_cross = x0 + (py - y0) * (x1 - x0) / (y1 - y0);
                if px < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn contains_or_touches(&self, p: (f64, f64)) -> bool {
        self.on_boundary(p) || self.contains_strict(p)
    }
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn point_on_segment(p: (f64, f64), (a, b): ((f64, f64), (f64, f64))) -> bool {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    if orient(a, b, p).abs() > BOUNDARY_EPS * len.max(1.0) {
        return false;
    }
    p.0 >= a.0.min(b.0) - BOUNDARY_EPS
        && p.0 <= a.0.max(b.0) + BOUNDARY_EPS
        && p.1 >= a.1.min(b.1) - BOUNDARY_EPS
        && p.1 <= a.1.max(b.1) + BOUNDARY_EPS
}

fn segments_intersect(s: ((f64, f64), (f64, f64)), t: ((f64, f64), (f64, f64))) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    point_on_segment(a, t) || point_on_segment(b, t) || point_on_segment(c, s) || point_on_segment(d, s)
}

/// Row-major ids of cells lying completely inside the outline: the cell
/// center must be strictly inside and all four corners inside or on the
/// shoreline.
pub fn extract_clean_pixels(outline: &LakeOutline, grid: &BandGrid) -> Vec<usize> {
    let mut ids = Vec::new();
    for row in 0..grid.height() {
        for col in 0..grid.width() {
            let (x, y) = (col as f64, row as f64);
            let center_in = outline.contains_strict((x + 0.5, y + 0.5));
            if center_in
                && [(x, y), (x + 1.0, y), (x, y + 1.0), (x + 1.0, y + 1.0)]
                    .into_iter()
                    .all(|c| outline.contains_or_touches(c))
            {
                ids.push(row * grid.width() + col);
            }
        }
    }
    ids
}
