use curkit::cur::{extract, IndexList, MiddleKind};
use curkit::io::{format_csv, format_matrix_market, parse_matrix, read_factors, read_matrix, write_factors, write_matrix};
use curkit::random::RngStream;
use curkit::{CurError, Matrix};
use proptest::prelude::*;

fn bits(a: &Matrix) -> Vec<u64> {
    a.iter().map(|x| x.to_bits()).collect()
}

fn awkward(rng: &mut RngStream, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| {
        let scale = 10f64.powi((rng.uniform() * 600.0) as i32 - 300);
        rng.normal() * scale
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn text_formats_are_bitwise(seed in any::<u64>(), m in 1usize..12, n in 1usize..12) {
        let a = awkward(&mut RngStream::new(seed, 0), m, n);
        for text in [format_csv(&a), format_matrix_market(&a)] {
            let b = parse_matrix(&text).unwrap();
            prop_assert_eq!(b.shape(), a.shape());
            prop_assert_eq!(bits(&b), bits(&a));
        }
    }
}

#[test]
fn files_are_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let a = awkward(&mut RngStream::new(1, 0), 7, 5);
    for name in ["a.csv", "a.mtx", "a.txt"] {
        let path = dir.path().join(name);
        write_matrix(&path, &a).unwrap();
        assert_eq!(bits(&read_matrix(&path).unwrap()), bits(&a));
    }
}

#[test]
fn factors_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = RngStream::new(2, 0).gaussian_matrix(9, 8);
    let rows = IndexList::new(vec![4, 1, 4, 7], 9).unwrap();
    let cols = IndexList::new(vec![0, 6, 3], 8).unwrap();
    for middle in [MiddleKind::PinvU, MiddleKind::PinvTruncatedU { rank: 2 }, MiddleKind::OptimalCar] {
        let f = extract(&a, &rows, &cols, middle).unwrap();
        let out = dir.path().join(middle.to_string().replace(':', "_"));
        write_factors(&out, &f).unwrap();
        let g = read_factors(&out).unwrap();
        assert_eq!(g.row_idx, f.row_idx);
        assert_eq!(g.col_idx, f.col_idx);
        assert_eq!(g.middle, f.middle);
        assert_eq!(bits(&g.c), bits(&f.c));
        assert_eq!(bits(&g.u), bits(&f.u));
        assert_eq!(bits(&g.r), bits(&f.r));
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\nx\n4\n").unwrap_err();
    assert!(matches!(err, CurError::Parse { line: 5, .. }), "{err}");
    let err = parse_matrix("1,2\n3\n").unwrap_err();
    assert!(matches!(err, CurError::Parse { line: 2, .. }), "{err}");
    let err = parse_matrix("%%MatrixMarket matrix coordinate real general\n").unwrap_err();
    assert!(matches!(err, CurError::Parse { line: 1, .. }), "{err}");
}
