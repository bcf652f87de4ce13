use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::fixtures::reference;

fn real(rows: &[&[i64]]) -> Matrix {
    Matrix::from_ints(FieldSpec::Real, rows).unwrap()
}

fn gf(p: u64) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

#[test]
fn reference_decoder_has_full_row_rank() {
    assert_eq!(reference::scheme().d().rank(), 4);
}

#[test]
fn zero_matrix_rank() {
    assert_eq!(Matrix::zeros(FieldSpec::Real, 3, 3).rank(), 0);
}

#[test]
fn reduced_decoder_of_user_one() {
    let d = reference::scheme().d().clone();
    let red = d.delete_cols(&IndexSet::new(vec![0, 1, 2]).unwrap()).unwrap();
    assert_eq!(red, real(&[&[0, 0, 0], &[1, 0, 0], &[0, 3, 0], &[1, 1, 1]]));
    assert_eq!(red.rank(), 3);
}

#[test]
fn reference_null_space_matches_printed_span() {
    let d = reference::scheme().d().clone();
    let basis = d.null_space_basis();
    assert_eq!((basis.rows(), basis.cols()), (6, 2));
    assert!(d.matmul(&basis).unwrap().is_zero());
    let printed = real(&[
        &[-7, -1],
        &[8, 2],
        &[-6, 0],
        &[-2, -2],
        &[2, 0],
        &[0, 2],
    ]);
    assert!(basis.same_column_span(&printed).unwrap());
}

#[test]
fn identity_has_trivial_null_space() {
    let basis = Matrix::identity(FieldSpec::Real, 4).null_space_basis();
    assert_eq!((basis.rows(), basis.cols()), (4, 0));
}

#[test]
fn gf2_sum_constraint_null_space() {
    let m = Matrix::from_ints(gf(2), &[[1, 1]]).unwrap();
    let basis = m.null_space_basis();
    assert_eq!(basis, Matrix::from_ints(gf(2), &[[1], [1]]).unwrap());
}

#[test]
fn selecting_rows_of_printed_randomness() {
    let c = reference::printed_randomness();
    let sub = c.select_rows(&IndexSet::new(vec![2, 4]).unwrap()).unwrap();
    assert_eq!(sub, real(&[&[-6, 0], &[2, 0]]));
    assert_eq!(c.select_cols(&IndexSet::range(2)).unwrap(), c);
}

#[test]
fn out_of_range_selection_fails() {
    let m = Matrix::identity(FieldSpec::Real, 2);
    assert!(m.select_rows(&IndexSet::new(vec![2]).unwrap()).is_err());
    assert!(m.select_cols(&IndexSet::new(vec![0, 5]).unwrap()).is_err());
    assert!(m.delete_cols(&IndexSet::new(vec![3]).unwrap()).is_err());
    assert!(IndexSet::new(vec![1, 1]).is_err());
}

#[test]
fn reference_factorization_products() {
    let s = reference::scheme();
    assert_eq!(&s.d().matmul(s.e()).unwrap(), s.f());
    let e_aug = s.e().hcat(&reference::printed_randomness()).unwrap();
    let expected = s.f().hcat(&Matrix::zeros(FieldSpec::Real, 4, 2)).unwrap();
    assert_eq!(s.d().matmul(&e_aug).unwrap(), expected);
    let i = Matrix::identity(FieldSpec::Real, 4);
    assert_eq!(&i.matmul(s.f()).unwrap(), s.f());
}

#[test]
fn matmul_dimension_mismatch() {
    let a = Matrix::identity(FieldSpec::Real, 2);
    let b = Matrix::identity(FieldSpec::Real, 3);
    assert!(matches!(a.matmul(&b), Err(Error::Structure(_))));
    let c = Matrix::identity(gf(7), 2);
    assert!(matches!(a.matmul(&c), Err(Error::FieldMismatch { .. })));
}

#[test]
fn gram_eigenvalues_from_worked_example() {
    let x = DMatrix::from_row_slice(2, 2, &[14.0, 7.0, 7.0, 11.0]);
    let e = sym_eigs(&x, DEFAULT_EIG_TOL).unwrap();
    assert!((e[0] - 5.34).abs() < 0.01 && (e[1] - 19.66).abs() < 0.01, "{e:?}");
    let y = DMatrix::from_row_slice(2, 2, &[68.0, -48.0, -48.0, 36.0]);
    let e = sym_eigs(&y, DEFAULT_EIG_TOL).unwrap();
    assert!((e[0] - 1.4).abs() < 0.01, "{e:?}");
}

#[test]
fn identity_eigenvalues() {
    let e = sym_eigs(&DMatrix::identity(3, 3), DEFAULT_EIG_TOL).unwrap();
    assert_eq!(e, vec![1.0, 1.0, 1.0]);
}

#[test]
fn eigen_input_validation() {
    assert!(sym_eigs(&DMatrix::zeros(2, 3), 1e-10).is_err());
    let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(sym_eigs(&asym, 1e-10).is_err());
    assert!(sym_eigs(&DMatrix::identity(2, 2), 0.0).is_err());
}

fn gf7_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(0i64..7, rows * cols).prop_map(move |v| {
        let rows: Vec<Vec<i64>> = v.chunks(cols.max(1)).map(<[i64]>::to_vec).collect();
        if cols == 0 {
            return Matrix::zeros(gf(7), rows.len(), 0);
        }
        Matrix::from_ints(gf(7), &rows).unwrap()
    })
}

fn gf7_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(r, k, c)| (gf7_matrix(r, k), gf7_matrix(k, c)))
}

proptest! {
    #[test]
    fn rank_nullity((a, _) in gf7_pair()) {
        let basis = a.null_space_basis();
        prop_assert!(a.matmul(&basis).unwrap().is_zero());
        prop_assert_eq!(basis.rank(), a.cols() - a.rank());
    }

    #[test]
    fn product_rank_bounded((a, b) in gf7_pair()) {
        let r = a.matmul(&b).unwrap().rank();
        prop_assert!(r <= a.rank().min(b.rank()));
    }

    #[test]
    fn gram_eigenvalues_are_psd_and_sum_to_trace(v in proptest::collection::vec(-5.0f64..5.0, 12)) {
        let b = DMatrix::from_row_slice(3, 4, &v);
        let g = &b * b.transpose();
        let e = sym_eigs(&g, DEFAULT_EIG_TOL).unwrap();
        prop_assert!(e.iter().all(|&x| x >= -DEFAULT_EIG_TOL));
        let trace = g.trace();
        let sum: f64 = e.iter().sum();
        prop_assert!((trace - sum).abs() <= 1e-8 * trace.abs().max(1.0));
    }
}
