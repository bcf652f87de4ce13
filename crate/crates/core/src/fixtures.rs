//! Reference instances for tests and documentation.

pub mod reference {
    //! The `(N = 6, K = 4, L = 5)` worked example with integer entries.

    use crate::field::FieldSpec;
    use crate::linalg::Matrix;
    use crate::scheme::Scheme;

    pub const F: [[i64; 5]; 4] = [
        [3, 0, -3, 4, -1],
        [0, 0, 2, 6, 1],
        [0, 3, 1, 3, 1],
        [3, 3, 6, 1, 1],
    ];

    pub const D: [[i64; 6]; 4] = [
        [2, 1, -1, 0, 0, 0],
        [0, 1, 1, 1, 0, 0],
        [0, 0, 1, 0, 3, 0],
        [0, 0, 0, 1, 1, 1],
    ];

    pub const E: [[i64; 5]; 6] = [
        [1, 0, 0, 2, 0],
        [1, 0, -2, 3, 0],
        [0, 0, 1, 3, 1],
        [-1, 0, 3, 0, 0],
        [0, 1, 0, 0, 0],
        [4, 2, 3, 1, 1],
    ];

    /// The null-space basis printed with the worked example, as columns.
    pub const C: [[i64; 2]; 6] = [[-7, -1], [8, 2], [-6, 0], [-2, -2], [2, 0], [0, 2]];

    pub fn scheme_in(field: FieldSpec) -> Scheme {
        Scheme::new(
            Matrix::from_ints(field, &F).unwrap(),
            Matrix::from_ints(field, &D).unwrap(),
            Matrix::from_ints(field, &E).unwrap(),
        )
        .expect("example scheme is valid")
    }

    /// Over the reals.
    pub fn scheme() -> Scheme {
        scheme_in(FieldSpec::Real)
    }

    pub fn printed_randomness() -> Matrix {
        Matrix::from_ints(FieldSpec::Real, &C).unwrap()
    }
}
