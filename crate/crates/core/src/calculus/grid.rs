use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible number of cells along any axis.
pub const MIN_CELLS: usize = 4;

/// Cell-centered rectangular grid on `(0, L_1) x ... x (0, L_d)`, `d` in {1, 2}.
///
/// Cells are numbered with the x index running fastest. Cell `i` along axis
/// `a` has its center at `(i + 1/2) * spacing[a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    dim: usize,
    cells: [usize; 2],
    extents: [T; 2],
    spacing: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, cells_per_axis: &[usize], extents: &[T]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if cells_per_axis.len() != dim || extents.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} cell counts and extents, got {} and {}",
                cells_per_axis.len(),
                extents.len()
            )));
        }
        let mut cells = [1usize; 2];
        let mut ext = [T::one(); 2];
        let mut spacing = [T::one(); 2];
        for a in 0..dim {
            if cells_per_axis[a] < MIN_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells, need at least {MIN_CELLS}",
                    cells_per_axis[a]
                )));
            }
            if !(extents[a] > T::zero()) || !extents[a].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a} extent {} is not positive", extents[a])));
            }
            cells[a] = cells_per_axis[a];
            ext[a] = extents[a];
            spacing[a] = extents[a] / T::from_count(cells_per_axis[a]);
        }
        Ok(Self { dim, cells, extents: ext, spacing })
    }

    /// Unit interval with `n` cells.
    pub fn unit_1d(n: usize) -> Result<Self> {
        Self::new(1, &[n], &[T::one()])
    }

    /// Unit square with `n x n` cells.
    pub fn unit_2d(n: usize) -> Result<Self> {
        Self::new(2, &[n, n], &[T::one(), T::one()])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    #[inline]
    pub fn extents(&self) -> &[T] {
        &self.extents[..self.dim]
    }

    #[inline]
    pub fn spacing(&self) -> &[T] {
        &self.spacing[..self.dim]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_volume(&self) -> T {
        self.spacing().iter().fold(T::one(), |acc, &h| acc * h)
    }

    /// Measure of the domain.
    pub fn volume(&self) -> T {
        self.extents().iter().fold(T::one(), |acc, &l| acc * l)
    }

    /// Linear-index stride along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.cells[0]
        }
    }

    /// Multi-index of a linear cell index.
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        [idx % self.cells[0], idx / self.cells[0]]
    }

    #[inline]
    pub fn linear_index(&self, mi: [usize; 2]) -> usize {
        mi[0] + self.cells[0] * mi[1]
    }

    /// Cell center coordinates; unused trailing coordinates are zero.
    pub fn center(&self, idx: usize) -> [T; 2] {
        let mi = self.multi_index(idx);
        let half = T::lit(0.5);
        let mut x = [T::zero(); 2];
        for a in 0..self.dim {
            x[a] = (T::from_count(mi[a]) + half) * self.spacing[a];
        }
        x
    }

    /// Coordinates of the upper face of cell `idx` along `axis`.
    pub fn upper_face_center(&self, idx: usize, axis: usize) -> [T; 2] {
        let mut x = self.center(idx);
        x[axis] = x[axis] + T::lit(0.5) * self.spacing[axis];
        x
    }

    /// Whether the upper face of cell `idx` along `axis` is an interior face.
    #[inline]
    pub fn has_upper_face(&self, idx: usize, axis: usize) -> bool {
        self.multi_index(idx)[axis] + 1 < self.cells[axis]
    }

    /// Face slots seen from each corner of cell `idx`.
    ///
    /// A corner picks, per axis, either the upper face (stored at `idx`) or the
    /// lower face (stored at `idx - stride`). Boundary faces are `None`; the
    /// mirror ghost convention makes the normal difference vanish there.
    pub fn corners(&self, idx: usize) -> Corners {
        let mi = self.multi_index(idx);
        let mut faces = [[None; 2]; 2];
        for a in 0..self.dim {
            let s = self.stride(a);
            faces[a][0] = (mi[a] + 1 < self.cells[a]).then_some(idx);
            faces[a][1] = (mi[a] > 0).then(|| idx - s);
        }
        Corners { dim: self.dim, faces, next: 0 }
    }

    /// Number of corners per cell, `2^dim`.
    #[inline]
    pub fn corners_per_cell(&self) -> usize {
        1 << self.dim
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.cells == other.cells && self.extents == other.extents
    }
}

/// Iterator over the `2^dim` corners of a cell; see [`Grid::corners`].
#[derive(Debug, Clone)]
pub struct Corners {
    dim: usize,
    faces: [[Option<usize>; 2]; 2],
    next: usize,
}

impl Iterator for Corners {
    type Item = [Option<usize>; 2];

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= 1 << self.dim {
            return None;
        }
        let c = self.next;
        self.next += 1;
        let mut out = [None; 2];
        for (a, slot) in out.iter_mut().enumerate().take(self.dim) {
            *slot = self.faces[a][(c >> a) & 1];
        }
        Some(out)
    }
}
