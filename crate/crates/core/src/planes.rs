//! The eight planes `z ≡ ±m x ± y (mod 1)`, `m ∈ {2^a-1, 2^a+1}`, on which
//! consecutive output triples pile up.

use std::fmt;

use serde::Serialize;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_i128(v: i128) -> Self {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// `z ≡ sign_x · m · x + sign_y · y (mod 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Plane {
    pub m: u64,
    pub sign_x: Sign,
    pub sign_y: Sign,
}

impl Plane {
    /// Unreduced right-hand side `sign_x · m · x + sign_y · y`.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.sign_x.as_f64() * self.m as f64 * x + self.sign_y.as_f64() * y
    }

    /// Height of the surface over `(x, y)`, reduced into `[0, 1)`.
    pub fn surface_z(&self, x: f64, y: f64) -> f64 {
        frac(self.eval(x, y))
    }

    /// File-name friendly tag, e.g. `m8388609_p_m`.
    pub fn tag(&self) -> String {
        let s = |s: Sign| if s == Sign::Plus { 'p' } else { 'm' };
        format!("m{}_{}_{}", self.m, s(self.sign_x), s(self.sign_y))
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z = {}{}x {} y mod 1",
            self.sign_x.as_char(),
            self.m,
            self.sign_y.as_char()
        )
    }
}

/// All eight planes for one shift `a`, in the fixed order `m` ascending, then
/// `sign_x`, then `sign_y`, with `+` before `-`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneFamily {
    pub a: u32,
    pub planes: [Plane; 8],
}

impl PlaneFamily {
    pub fn iter(&self) -> impl Iterator<Item = &Plane> {
        self.planes.iter()
    }

    pub fn index_of(&self, plane: &Plane) -> Option<usize> {
        self.planes.iter().position(|p| p == plane)
    }
}

pub fn family(a: u32) -> Result<PlaneFamily, Error> {
    if !(1..=62).contains(&a) {
        return Err(Error::PlaneShift(a));
    }
    let p = 1u64 << a;
    let mut planes = [Plane {
        m: 0,
        sign_x: Sign::Plus,
        sign_y: Sign::Plus,
    }; 8];
    let mut k = 0;
    for m in [p - 1, p + 1] {
        for sign_x in [Sign::Plus, Sign::Minus] {
            for sign_y in [Sign::Plus, Sign::Minus] {
                planes[k] = Plane { m, sign_x, sign_y };
                k += 1;
            }
        }
    }
    Ok(PlaneFamily { a, planes })
}

/// A point of the unit cube (or of the magnified slab, depending on context).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }
}

/// `t mod 1` in `[0, 1)`.
#[inline]
pub fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    // t slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Vertical distance from `p` to the plane on the torus, in `[0, 1/2]`.
#[inline]
pub fn torus_dist(p: &Point3, plane: &Plane) -> f64 {
    let f = frac(p.z - plane.eval(p.x, p.y));
    f.min(1.0 - f)
}

/// Nearest plane of the family. Ties go to the earlier plane in the family's
/// fixed order.
pub fn min_dist(p: &Point3, fam: &PlaneFamily) -> (f64, Plane) {
    let (idx, d) = min_dist_index(p, fam);
    (d, fam.planes[idx])
}

pub(crate) fn min_dist_index(p: &Point3, fam: &PlaneFamily) -> (usize, f64) {
    let mut best = (0, torus_dist(p, &fam.planes[0]));
    for (i, plane) in fam.planes.iter().enumerate().skip(1) {
        let d = torus_dist(p, plane);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { nx: 64, ny: 64 }
    }
}

/// Sampled surface of one plane over `[0, x_max) × [0, 1)`.
///
/// Nodes sit at cell centres, so no node lands on the region boundary. Each
/// column of nodes (fixed `x`) is a polyline along `y`, cut wherever the
/// surface wraps from 1 back to 0. Vertices are `(magnify·x, y, z)`.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub plane: Plane,
    pub grid: Grid,
    pub magnify: f64,
    pub strips: Vec<Vec<[f64; 3]>>,
    /// `floor` of the unreduced surface value per node, row-major in `x`.
    sheets: Vec<i64>,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.strips.iter().map(Vec::len).sum()
    }

    /// Connected components of the sampled surface: grid neighbours are joined
    /// when no wrap separates them.
    pub fn component_count(&self) -> usize {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut parent: Vec<usize> = (0..nx * ny).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let union = |parent: &mut Vec<usize>, i: usize, j: usize| {
            let (ri, rj) = (find(parent, i), find(parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        };
        for ix in 0..nx {
            for iy in 0..ny {
                let here = ix * ny + iy;
                if iy + 1 < ny && self.sheets[here] == self.sheets[here + 1] {
                    union(&mut parent, here, here + 1);
                }
                if ix + 1 < nx && self.sheets[here] == self.sheets[here + ny] {
                    union(&mut parent, here, here + ny);
                }
            }
        }
        (0..nx * ny).filter(|&i| find(&mut parent, i) == i).count()
    }
}

pub fn mesh(plane: &Plane, x_max: f64, magnify: f64, grid: Grid) -> Result<Mesh, Error> {
    if grid.nx < 2 || grid.ny < 2 {
        return Err(Error::EmptyGrid(grid.nx, grid.ny));
    }
    if !(x_max > 0.0 && x_max <= 1.0 && magnify > 0.0) {
        return Err(Error::MeshRegion { x_max, magnify });
    }
    let mut strips = Vec::new();
    let mut sheets = Vec::with_capacity(grid.nx * grid.ny);
    for ix in 0..grid.nx {
        let x = (ix as f64 + 0.5) * x_max / grid.nx as f64;
        let mut strip: Vec<[f64; 3]> = Vec::new();
        let mut prev_sheet = None;
        for iy in 0..grid.ny {
            let y = (iy as f64 + 0.5) / grid.ny as f64;
            let v = plane.eval(x, y);
            let sheet = v.floor() as i64;
            if prev_sheet.is_some_and(|s| s != sheet) && !strip.is_empty() {
                strips.push(std::mem::take(&mut strip));
            }
            strip.push([magnify * x, y, frac(v)]);
            sheets.push(sheet);
            prev_sheet = Some(sheet);
        }
        strips.push(strip);
    }
    Ok(Mesh {
        plane: *plane,
        grid,
        magnify,
        strips,
        sheets,
    })
}
