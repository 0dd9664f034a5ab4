use crate::scalar::Real;

/// Symmetric positive-definite operator, applied matrix-free.
pub(crate) trait SpdOperator<T: Real> {
    fn apply(&self, x: &[T], y: &mut [T]);
    fn diagonal(&self) -> Vec<T>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome<T> {
    pub iterations: usize,
    pub converged: bool,
    _scalar: std::marker::PhantomData<T>,
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients; `x` holds the initial guess on
/// entry. Stops when `|r| <= rel_tol |b|` in the Euclidean norm.
pub(crate) fn pcg<T: Real, A: SpdOperator<T> + ?Sized>(
    op: &A,
    b: &[T],
    x: &mut [T],
    rel_tol: T,
    max_iter: usize,
) -> CgOutcome<T> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return CgOutcome { iterations: 0, converged: true, _scalar: std::marker::PhantomData };
    }
    let inv_diag: Vec<T> = op.diagonal().into_iter().map(|d| T::one() / d).collect();
    let mut r = vec![T::zero(); n];
    op.apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let target = rel_tol * b_norm;
    let mut r_norm = dot(&r, &r).sqrt();
    if r_norm <= target {
        return CgOutcome { iterations: 0, converged: true, _scalar: std::marker::PhantomData };
    }
    let mut zv: Vec<T> = r.iter().zip(&inv_diag).map(|(&a, &d)| a * d).collect();
    let mut p = zv.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &zv);
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return CgOutcome { iterations: it, converged: false, _scalar: std::marker::PhantomData };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = dot(&r, &r).sqrt();
        if r_norm <= target {
            return CgOutcome { iterations: it, converged: true, _scalar: std::marker::PhantomData };
        }
        for i in 0..n {
            zv[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &zv);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = zv[i] + beta * p[i];
        }
    }
    CgOutcome { iterations: max_iter, converged: false, _scalar: std::marker::PhantomData }
}
