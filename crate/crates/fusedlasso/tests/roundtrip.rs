use fusedlasso::formats::{
    format_design, format_edges, format_node_weights, format_response, format_vector,
    parse_design, parse_edges, parse_node_weights, parse_response,
};
use fusedlasso::results::{to_json, CellDoc, GridDoc, PathDoc, SolveDoc, SparseBeta};
use fusedlasso_core::{CoxData, Loss, Matrix, PenaltyGraph, Response};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("positive", |v| v.is_finite() && *v > 0.0),
        1e-3f64..1e3,
    ]
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    #[test]
    fn design_round_trip(n in 1usize..6, p in 1usize..6, seed in proptest::collection::vec(finite(), 36)) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| seed[i * 6..i * 6 + p].to_vec()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let back = parse_design(&format_design(&x), "X").unwrap();
        prop_assert!(same_bits(back.as_col_major(), x.as_col_major()));
        prop_assert_eq!((back.nrows(), back.ncols()), (n, p));
    }

    #[test]
    fn response_round_trip(y in proptest::collection::vec(finite(), 1..20)) {
        let text = format_vector(&y);
        let Response::Continuous(back) = parse_response(&text, "y", Loss::Squared).unwrap() else {
            panic!()
        };
        prop_assert!(same_bits(&back, &y));
        prop_assert_eq!(format_response(&Response::Continuous(y.clone())), text);
    }

    #[test]
    fn cox_round_trip(raw in proptest::collection::vec((0.0f64..100.0, any::<bool>()), 1..12)) {
        let mut times: Vec<f64> = raw.iter().map(|r| r.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let status: Vec<bool> = raw.iter().take(times.len()).map(|r| r.1).collect();
        prop_assume!(status.iter().any(|s| *s));
        let r = Response::Survival(CoxData::new(times.clone(), status.clone()).unwrap());
        let Response::Survival(back) = parse_response(&format_response(&r), "y", Loss::Cox).unwrap() else {
            panic!()
        };
        prop_assert!(same_bits(back.times(), &times));
        prop_assert_eq!(back.status(), &status[..]);
    }

    #[test]
    fn graph_round_trip(p in 2usize..8, ws in proptest::collection::vec(positive(), 16)) {
        let edges: Vec<(usize, usize, f64)> = (1..p).map(|k| (k - 1, k, ws[k])).collect();
        let nodes: Vec<f64> = (0..p).map(|k| if k % 2 == 0 { ws[8 + k] } else { 1.0 }).collect();
        let g = PenaltyGraph::new(nodes.clone(), edges.clone()).unwrap();
        let back_edges = parse_edges(&format_edges(&g), "g", p).unwrap();
        let back_nodes = parse_node_weights(&format_node_weights(&g), "w", p).unwrap();
        prop_assert_eq!(back_edges.len(), edges.len());
        for (a, b) in back_edges.iter().zip(&edges) {
            prop_assert_eq!((a.0, a.1, a.2.to_bits()), (b.0, b.1, b.2.to_bits()));
        }
        prop_assert!(same_bits(&back_nodes, &nodes));
    }

    #[test]
    fn solve_document_round_trip(beta in proptest::collection::vec(finite(), 1..30), obj in finite(), l1 in finite(), res in proptest::option::of(finite())) {
        let doc = SolveDoc {
            schema_version: 1,
            command: "solve".into(),
            loss: "squared".into(),
            solver: "exact".into(),
            n: 3,
            p: beta.len(),
            lambda1: l1,
            lambda2: 0.5,
            objective: obj,
            converged: true,
            iterations: 17,
            certificate_residual: res,
            beta: SparseBeta::from_dense(&beta),
        };
        let text = to_json(&doc);
        let back: SolveDoc = serde_json::from_str(&text).unwrap();
        let expected: Vec<f64> = beta.iter().map(|v| if *v == 0.0 { 0.0 } else { *v }).collect();
        prop_assert!(same_bits(&back.beta.to_dense().unwrap(), &expected));
        prop_assert_eq!(back.objective.to_bits(), obj.to_bits());
        prop_assert_eq!(back.lambda1.to_bits(), l1.to_bits());
        prop_assert_eq!(back.certificate_residual.map(f64::to_bits), res.map(f64::to_bits));
    }

    #[test]
    fn path_document_round_trip(l1 in proptest::collection::vec(positive(), 1..4), l2 in proptest::collection::vec(positive(), 1..3), beta in proptest::collection::vec(finite(), 3)) {
        let mut cells = Vec::new();
        for (i2, b) in l2.iter().enumerate() {
            for (i1, a) in l1.iter().enumerate() {
                cells.push(CellDoc {
                    lambda1_index: i1,
                    lambda2_index: i2,
                    lambda1: *a,
                    lambda2: *b,
                    status: if i1 == 0 { "skipped".into() } else { "solved".into() },
                    error: None,
                    objective: (i1 > 0).then_some(beta[0]),
                    nonzero: 2,
                    converged: i1 > 0,
                    seconds: 0.25,
                    certificate_residual: None,
                    beta: (i1 > 0).then(|| SparseBeta::from_dense(&beta)),
                });
            }
        }
        let doc = PathDoc {
            schema_version: 1,
            command: "path".into(),
            loss: "squared".into(),
            solver: "huber".into(),
            n: 5,
            p: 3,
            grid: GridDoc { lambda1: l1, lambda2: l2 },
            cells,
        };
        let back: PathDoc = serde_json::from_str(&to_json(&doc)).unwrap();
        prop_assert!(same_bits(&back.grid.lambda1, &doc.grid.lambda1));
        prop_assert!(same_bits(&back.grid.lambda2, &doc.grid.lambda2));
        for (a, b) in back.cells.iter().zip(&doc.cells) {
            prop_assert_eq!(a.lambda1.to_bits(), b.lambda1.to_bits());
            prop_assert_eq!(a.objective.map(f64::to_bits), b.objective.map(f64::to_bits));
            prop_assert_eq!(&a.status, &b.status);
            let (x, y) = (a.beta.as_ref().map(|s| s.to_dense().unwrap()), b.beta.as_ref().map(|s| s.to_dense().unwrap()));
            prop_assert_eq!(x.is_some(), y.is_some());
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!(same_bits(&x, &y));
            }
        }
    }
}
