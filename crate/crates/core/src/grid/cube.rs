use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Shape;
use crate::error::{Error, Result};

/// An axis-aligned cube with corners on cell boundaries, in cell units.
///
/// Anchors are signed because zero-extension mode admits cubes that stick
/// out of the domain. The second anchor component is always 0 in 1-d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridCube {
    dim: usize,
    anchor: [i64; 2],
    side: usize,
}

impl GridCube {
    pub fn new(dim: usize, anchor: &[i64], side: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("cube dimension must be 1 or 2, got {dim}")));
        }
        if anchor.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "{dim}-d cube needs {dim} anchor coordinates, got {}",
                anchor.len()
            )));
        }
        if side == 0 {
            return Err(Error::InvalidParameter("cube side must be at least one cell".into()));
        }
        let a1 = if dim == 2 { anchor[1] } else { 0 };
        Ok(GridCube {
            dim,
            anchor: [anchor[0], a1],
            side,
        })
    }

    pub fn new_1d(anchor: i64, side: usize) -> Self {
        assert!(side > 0);
        GridCube {
            dim: 1,
            anchor: [anchor, 0],
            side,
        }
    }

    pub fn new_2d(anchor: [i64; 2], side: usize) -> Self {
        assert!(side > 0);
        GridCube { dim: 2, anchor, side }
    }

    /// The whole domain.
    pub fn whole(dim: usize, n: usize) -> Self {
        GridCube {
            dim,
            anchor: [0, 0],
            side: n,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn anchor(&self) -> [i64; 2] {
        self.anchor
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn extent(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.side
        } else {
            1
        }
    }

    /// Number of cells `L^d` (including any cells outside the domain).
    #[inline]
    pub fn cell_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// True when the cube lies inside the domain of `shape`.
    pub fn fits(&self, shape: Shape) -> bool {
        self.dim == shape.dim
            && (0..self.dim).all(|ax| {
                self.anchor[ax] >= 0 && self.anchor[ax] as usize + self.side <= shape.n
            })
    }

    pub(crate) fn check_within(&self, shape: Shape) -> Result<()> {
        if self.fits(shape) {
            Ok(())
        } else {
            Err(Error::Range {
                cube: self.to_string(),
                dim: shape.dim,
                n: shape.n,
            })
        }
    }

    /// Index ranges of the cells of the domain covered by the cube, per storage axis.
    /// `None` when the cube misses the domain entirely.
    pub fn clipped_ranges(&self, shape: Shape) -> Option<[Range<usize>; 2]> {
        let mut out = [0..1, 0..1];
        for (ax, r) in out.iter_mut().enumerate().take(self.dim) {
            let lo = self.anchor[ax].max(0);
            let hi = (self.anchor[ax] + self.side as i64).min(shape.n as i64);
            if lo >= hi {
                return None;
            }
            *r = lo as usize..hi as usize;
        }
        Some(out)
    }

    /// Flat indices of the domain cells covered by the cube, row-major.
    pub fn cell_indices(&self, shape: Shape) -> impl Iterator<Item = usize> {
        let e1 = shape.extent(1);
        let [r0, r1] = self.clipped_ranges(shape).unwrap_or([0..0, 0..0]);
        r0.flat_map(move |i| r1.clone().map(move |j| i * e1 + j))
    }

    pub fn contains_cell(&self, cell: [usize; 2]) -> bool {
        (0..self.dim).all(|ax| {
            let c = cell[ax] as i64;
            self.anchor[ax] <= c && c < self.anchor[ax] + self.side as i64
        })
    }

    /// True when every cell of `other` is covered by `self`.
    pub fn contains_cube(&self, other: &GridCube) -> bool {
        (0..self.dim).all(|ax| {
            self.anchor[ax] <= other.anchor[ax]
                && other.anchor[ax] + other.side as i64 <= self.anchor[ax] + self.side as i64
        })
    }
}

impl fmt::Display for GridCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ax in 0..self.dim {
            if ax > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{},{})", self.anchor[ax], self.anchor[ax] + self.side as i64)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CubeRepr {
    anchor: Vec<i64>,
    side: usize,
}

impl Serialize for GridCube {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CubeRepr {
            anchor: self.anchor[..self.dim].to_vec(),
            side: self.side,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridCube {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CubeRepr::deserialize(d)?;
        GridCube::new(r.anchor.len(), &r.anchor, r.side).map_err(serde::de::Error::custom)
    }
}

/// Cube family over which a supremum is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeFamily {
    /// Every grid cube contained in the domain.
    All,
    /// The standard dyadic subcubes of the domain.
    Dyadic,
}

impl CubeFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            CubeFamily::All => "all",
            CubeFamily::Dyadic => "dyadic",
        }
    }
}

impl fmt::Display for CubeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeSelection {
    All,
    Dyadic,
    /// Cubes of the `All` family that cover the given cell.
    Containing([usize; 2]),
}

impl From<CubeFamily> for CubeSelection {
    fn from(f: CubeFamily) -> Self {
        match f {
            CubeFamily::All => CubeSelection::All,
            CubeFamily::Dyadic => CubeSelection::Dyadic,
        }
    }
}

/// Streams the cubes of a family inside the domain, ordered by ascending side
/// and then lexicographic anchor.
pub fn enumerate_cubes(
    n: usize,
    dim: usize,
    selection: CubeSelection,
) -> Box<dyn Iterator<Item = GridCube>> {
    let anchors_for = move |side: usize, step: usize| {
        let max0 = (n - side) as i64;
        let max1 = if dim == 2 { (n - side) as i64 } else { 0 };
        (0..=max0).step_by(step).flat_map(move |a0| {
            (0..=max1).step_by(step).map(move |a1| GridCube {
                dim,
                anchor: [a0, a1],
                side,
            })
        })
    };
    match selection {
        CubeSelection::All => Box::new((1..=n).flat_map(move |side| anchors_for(side, 1))),
        CubeSelection::Dyadic => Box::new(
            (0..)
                .map(|k| 1usize << k)
                .take_while(move |&side| side <= n)
                .flat_map(move |side| anchors_for(side, side)),
        ),
        CubeSelection::Containing(cell) => Box::new(
            (1..=n)
                .flat_map(move |side| anchors_for(side, 1))
                .filter(move |q| q.contains_cell(cell)),
        ),
    }
}

/// The cube with the same center and three times the side.
pub fn triple(q: &GridCube, n: usize) -> Result<GridCube> {
    let side = 3 * q.side;
    let mut anchor = q.anchor;
    for a in anchor.iter_mut().take(q.dim) {
        *a -= q.side as i64;
    }
    let t = GridCube {
        dim: q.dim,
        anchor,
        side,
    };
    if t.fits(Shape::new(q.dim, n)) {
        Ok(t)
    } else {
        Err(Error::TriplingUnavailable {
            cube: q.to_string(),
            n,
        })
    }
}
