use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

pub fn smoke() -> f64 {
    let m = Array2::<C64>::eye(8);
    let p = m.dot(&m);
    let (ev, _) = p.eigh(UPLO::Lower).unwrap();
    ev.iter().sum()
}
