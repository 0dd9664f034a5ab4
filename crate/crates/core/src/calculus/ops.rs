use crate::calculus::field::{ScalarField, VectorField};
use crate::calculus::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Face gradient with mirror ghost cells.
///
/// The normal difference across every boundary face is zero, which is the
/// discrete form of the homogeneous Neumann condition.
pub fn grad<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    grad_slice(f.grid(), f.values())
}

pub(crate) fn grad_slice<T: Real>(g: &Grid<T>, v: &[T]) -> VectorField<T> {
    let mut out = VectorField::zeros(*g);
    for a in 0..g.dim() {
        let s = g.stride(a);
        let inv_h = T::one() / g.spacing()[a];
        let comp = out.component_mut(a);
        for idx in 0..g.len() {
            if g.has_upper_face(idx, a) {
                comp[idx] = (v[idx + s] - v[idx]) * inv_h;
            }
        }
    }
    out
}

/// Divergence of a face field with zero flux through the boundary.
///
/// This is exactly `-grad^T` with respect to the cell and face inner products.
pub fn div<T: Real>(field: &VectorField<T>) -> ScalarField<T> {
    let g = *field.grid();
    let mut out = vec![T::zero(); g.len()];
    div_into(field, &mut out);
    ScalarField::from_values_unchecked(g, out)
}

/// `out = div(field)`
pub(crate) fn div_into<T: Real>(field: &VectorField<T>, out: &mut [T]) {
    let g = field.grid();
    out.iter_mut().for_each(|o| *o = T::zero());
    for a in 0..g.dim() {
        let s = g.stride(a);
        let n_a = g.cells()[a];
        let inv_h = T::one() / g.spacing()[a];
        let comp = field.component(a);
        for (idx, o) in out.iter_mut().enumerate() {
            let ia = g.multi_index(idx)[a];
            let upper = if ia + 1 < n_a { comp[idx] } else { T::zero() };
            let lower = if ia > 0 { comp[idx - s] } else { T::zero() };
            *o += (upper - lower) * inv_h;
        }
    }
}

/// `out = -Δ_N x`, same stencil as `-div(grad x)`.
pub(crate) fn neg_laplacian_into<T: Real>(g: &Grid<T>, x: &[T], out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for a in 0..g.dim() {
        let s = g.stride(a);
        let n_a = g.cells()[a];
        let h = g.spacing()[a];
        let inv_h2 = T::one() / (h * h);
        for (idx, o) in out.iter_mut().enumerate() {
            let ia = g.multi_index(idx)[a];
            let mut acc = T::zero();
            if ia + 1 < n_a {
                acc += x[idx] - x[idx + s];
            }
            if ia > 0 {
                acc += x[idx] - x[idx - s];
            }
            *o += acc * inv_h2;
        }
    }
}

/// Diagonal of `-Δ_N`.
pub(crate) fn neg_laplacian_diagonal<T: Real>(g: &Grid<T>) -> Vec<T> {
    (0..g.len())
        .map(|idx| {
            let mi = g.multi_index(idx);
            (0..g.dim())
                .map(|a| {
                    let h = g.spacing()[a];
                    let faces = usize::from(mi[a] + 1 < g.cells()[a]) + usize::from(mi[a] > 0);
                    T::from_count(faces) / (h * h)
                })
                .sum()
        })
        .collect()
}

/// Neumann Laplacian, `div(grad f)`.
pub fn laplacian_neumann<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    div(&grad(f))
}

fn check_same<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<()> {
    if a.grid().same_shape(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Discrete `L^2` inner product.
pub fn inner_h<T: Real>(f: &ScalarField<T>, g: &ScalarField<T>) -> Result<T> {
    check_same(f, g)?;
    let s: T = f.values().iter().zip(g.values()).map(|(&a, &b)| a * b).sum();
    Ok(s * f.grid().cell_volume())
}

/// Inner product of two face fields, each interior face weighted by the cell volume.
pub fn inner_faces<T: Real>(f: &VectorField<T>, g: &VectorField<T>) -> Result<T> {
    if !f.grid().same_shape(g.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let mut s = T::zero();
    for a in 0..grid.dim() {
        for (idx, (&x, &y)) in f.component(a).iter().zip(g.component(a)).enumerate() {
            if grid.has_upper_face(idx, a) {
                s += x * y;
            }
        }
    }
    Ok(s * grid.cell_volume())
}

pub fn norm_h<T: Real>(f: &ScalarField<T>) -> T {
    let s: T = f.values().iter().map(|&a| a * a).sum();
    (s * f.grid().cell_volume()).sqrt()
}

/// `sum |grad f|^2 * vol`
pub fn dirichlet_sq<T: Real>(f: &ScalarField<T>) -> T {
    let gr = grad(f);
    inner_faces(&gr, &gr).expect("same grid")
}

/// Discrete `H^1` norm.
pub fn norm_v<T: Real>(f: &ScalarField<T>) -> T {
    let h = norm_h(f);
    (h * h + dirichlet_sq(f)).sqrt()
}

/// `H^2` surrogate `|-Δ_N f + f|_H`, equivalent to the `H^2` norm by elliptic regularity.
pub fn norm_h2<T: Real>(f: &ScalarField<T>) -> T {
    let lap = laplacian_neumann(f);
    norm_h(&f.zip_map(&lap, |a, l| a - l))
}
