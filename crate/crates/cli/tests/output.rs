use proptest::prelude::*;
use raf_cli::{read_csv, write_csv, CsvRow, Source, CSV_HEADER};
use raf_core::Loss;

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>(),
        1 => Just(f64::INFINITY),
        1 => Just(-0.0),
    ]
}

fn row() -> impl Strategy<Value = CsvRow> {
    (
        proptest::collection::vec(value(), 11),
        any::<bool>(),
        any::<bool>(),
        proptest::option::of(value()),
        proptest::option::of(value()),
        "[a-z =-]{0,12}",
    )
        .prop_map(|(v, hinge, mc, stderr_gen, stderr_mem, status)| CsvRow {
            sweep_value: v[0],
            alpha: v[1],
            eps: v[2],
            mu1: v[3],
            mustar: v[4],
            lambda: v[5],
            loss: if hinge { Loss::Hinge } else { Loss::Square },
            m: v[6],
            q: v[7],
            v: v[8],
            e_gen: v[9],
            e_mem: v[10],
            source: if mc { Source::Mc } else { Source::Theory },
            stderr_gen,
            stderr_mem,
            status,
        })
}

fn bits(r: &CsvRow) -> Vec<u64> {
    let opt = |x: Option<f64>| x.map_or(u64::MAX - 1, f64::to_bits);
    [r.sweep_value, r.alpha, r.eps, r.mu1, r.mustar, r.lambda, r.m, r.q, r.v, r.e_gen, r.e_mem]
        .iter()
        .map(|x| if x.is_nan() { u64::MAX } else { x.to_bits() })
        .chain([opt(r.stderr_gen), opt(r.stderr_mem)])
        .collect()
}

proptest! {
    #[test]
    fn rows_round_trip_bit_exactly(rows in proptest::collection::vec(row(), 0..8)) {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(bits(a), bits(b));
            prop_assert_eq!((a.loss, a.source, &a.status), (b.loss, b.source, &b.status));
        }
    }
}

#[test]
fn header_lists_the_columns() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.trim_end(), CSV_HEADER.join(","));
    assert_eq!(&CSV_HEADER[..3], ["sweep_value", "alpha", "eps"]);
}

#[test]
fn foreign_headers_are_rejected() {
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}
