//! Small reference instances with known structure, and fractional points
//! observed on them. Used by tests, the acceptance suite and the CLI docs.

use crate::instance::QapInstance;
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

fn matrix<T: Scalar>(rows: &[&[f64]], scale: f64) -> SquareMatrix<T> {
    let rows: Vec<Vec<T>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| T::of(v) / T::of(scale)).collect())
        .collect();
    SquareMatrix::from_rows(&rows).expect("square fixture")
}

/// n = 3 instance whose XY relaxation is strictly weaker than the projected
/// AJ relaxation. Optimum 23/18 at `(2,1,3)`.
pub fn example1<T: Scalar>() -> QapInstance<T> {
    let d = matrix(&[&[0., 1., 2.], &[1., 0., 1.], &[2., 1., 0.]], 1.0);
    let p = matrix(&[&[0., 4., 2.], &[3., 0., 3.], &[4., 2., 0.]], 18.0);
    QapInstance::new(p, d).expect("valid fixture")
}

/// n = 4 instance on which ab-cut separation stalls at a fractional point.
pub fn example3<T: Scalar>() -> QapInstance<T> {
    let d = matrix(
        &[
            &[0., 1., 2., 3.],
            &[1., 0., 1., 2.],
            &[2., 1., 0., 1.],
            &[3., 2., 1., 0.],
        ],
        1.0,
    );
    let p = matrix(
        &[
            &[0., 2., 1., 1.],
            &[2., 0., 2., 0.],
            &[1., 1., 0., 2.],
            &[2., 1., 1., 0.],
        ],
        16.0,
    );
    QapInstance::new(p, d).expect("valid fixture")
}

/// Recomputed lower bound table of [`example1`], in units of 1/18.
pub const EXAMPLE1_L_TIMES_18: [[f64; 3]; 3] = [[8., 6., 8.], [9., 6., 9.], [8., 6., 8.]];

/// Published variant of the [`example1`] lower bound table, in units of
/// 1/18. Its rows 1 and 2 are interchanged relative to the values obtained
/// from the reduced assignment problems ([`EXAMPLE1_L_TIMES_18`]); only row 3
/// and column 2 agree.
pub const EXAMPLE1_L_PRINTED_TIMES_18: [[f64; 3]; 3] = [[9., 6., 9.], [8., 6., 8.], [8., 6., 8.]];

/// A fractional `(x, z)` point together with the cuts reported against it.
pub struct FractionalPoint<T> {
    pub x: SquareMatrix<T>,
    pub z: SquareMatrix<T>,
}

/// A cut `z_ab >= coef * x_ab - sum delta_kl x_kl` with 1-based indices.
pub struct PrintedCut {
    pub a: usize,
    pub b: usize,
    pub coef: f64,
    pub delta: &'static [(usize, usize, f64)],
}

/// The three fractional points reported while adding cuts on [`example1`].
pub fn example1_points<T: Scalar>() -> [FractionalPoint<T>; 3] {
    [
        FractionalPoint {
            x: matrix(&[&[3., 0., 1.], &[1., 3., 0.], &[0., 1., 3.]], 4.0),
            z: matrix(&[&[24., 0., 8.], &[9., 18., 0.], &[0., 6., 24.]], 72.0),
        },
        FractionalPoint {
            x: matrix(&[&[4., 1., 0.], &[1., 2., 2.], &[0., 2., 3.]], 5.0),
            z: matrix(&[&[32., 6., 0.], &[9., 12., 18.], &[0., 12., 24.]], 90.0),
        },
        FractionalPoint {
            x: matrix(&[&[2., 1., 1.], &[2., 2., 0.], &[0., 1., 3.]], 4.0),
            z: matrix(&[&[8., 3., 5.], &[9., 6., 0.], &[0., 3., 12.]], 36.0),
        },
    ]
}

/// Cuts reported for the points of [`example1_points`], paired with the
/// index of the point they were reported against.
pub const EXAMPLE1_PRINTED_CUTS: [(usize, PrintedCut); 5] = [
    (0, PrintedCut { a: 1, b: 3, coef: 5. / 9., delta: &[(3, 1, 3. / 9.)] }),
    (0, PrintedCut { a: 3, b: 3, coef: 5. / 9., delta: &[(1, 2, 3. / 9.)] }),
    (1, PrintedCut { a: 1, b: 1, coef: 5. / 9., delta: &[(2, 2, 1. / 9.)] }),
    (1, PrintedCut { a: 3, b: 3, coef: 6. / 9., delta: &[(2, 1, 2. / 9.), (2, 2, 1. / 9.)] }),
    (2, PrintedCut { a: 3, b: 3, coef: 4. / 9., delta: &[(1, 2, 2. / 9.), (2, 2, 1. / 9.)] }),
];

/// The fractional point on which ab-cut separation stalls for [`example3`].
pub fn example3_stall_point<T: Scalar>() -> FractionalPoint<T> {
    FractionalPoint {
        x: matrix(
            &[
                &[1., 1., 0., 0.],
                &[1., 1., 0., 0.],
                &[0., 0., 1., 1.],
                &[0., 0., 1., 1.],
            ],
            2.0,
        ),
        z: matrix(
            &[
                &[7., 5., 0., 0.],
                &[6., 4., 0., 0.],
                &[0., 0., 5., 7.],
                &[0., 0., 5., 8.],
            ],
            32.0,
        ),
    }
}
