mod common;

use common::{function_from, window, Brute};
use proptest::prelude::*;
use treemax_core::ops::{Evaluator, OperatorKind};
use treemax_core::rational::{self, int};
use treemax_core::{SparseFunction, VertexId};

const TREES: [(&str, i64, i64); 4] = [("Tb:2", -3, 2), ("Sab:2,4", -2, 2), ("spike:3", -2, 2), ("Tb:3", -2, 1)];

fn picks() -> impl Strategy<Value = Vec<(usize, i64, u64)>> {
    prop::collection::vec((0usize..4000, -9i64..10, 1u64..5), 1..5)
}

fn check_all_operators(tree: usize, p: &[(usize, i64, u64)]) {
    let (name, lo, hi) = TREES[tree];
    let w = window(name, lo, hi);
    let f = function_from(&w, p);
    let ev = Evaluator::new(&w, &f).unwrap();
    let brute = Brute { w: &w, f: &f };
    for x in w.ids() {
        let got = |k| ev.eval_id(k, x).value;
        assert_eq!(got(OperatorKind::TCentred), brute.t(x), "T at {x:?}");
        assert_eq!(got(OperatorKind::UUncentred), brute.u(x), "U at {x:?}");
        assert_eq!(got(OperatorKind::BCentred), brute.b(x), "B at {x:?}");
        assert_eq!(got(OperatorKind::BuUncentred), brute.bu(x), "Bu at {x:?}");
        assert_eq!(got(OperatorKind::TMod), brute.tmod(x), "Tmod at {x:?}");
        assert_eq!(got(OperatorKind::UMod), brute.umod(x), "Umod at {x:?}");
        assert_eq!(got(OperatorKind::KKernel), brute.k(x), "K at {x:?}");
        assert_eq!(got(OperatorKind::MHlCentred), brute.m(x), "M at {x:?}");
        assert_eq!(got(OperatorKind::NHlUncentred), brute.n(x), "N at {x:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn windowed_values_match_enumeration(tree in 0usize..4, p in picks()) {
        check_all_operators(tree, &p);
    }

    // A certified value must equal the value on any larger window, and the
    // upper bound must dominate it.
    #[test]
    fn certificates_survive_window_growth(tree in 0usize..3, p in picks(), grow in 1i64..4) {
        let (name, lo, hi) = TREES[tree];
        let small = window(name, lo, hi);
        let big = window(name, lo - grow, hi + grow);
        let f = function_from(&small, &p);
        let es = Evaluator::new(&small, &f).unwrap();
        let eb = Evaluator::new(&big, &f).unwrap();
        for x in small.ids() {
            let addr = small.address_of(x);
            for k in OperatorKind::ALL {
                let a = es.eval_id(k, x);
                let b = eb.eval_at(k, &addr).unwrap();
                prop_assert!(a.upper_bound() >= &b.value, "{k} at {addr}: {} < {}", a.upper_bound(), b.value);
                if a.certified {
                    prop_assert_eq!(&a.value, &b.value, "{} at {}", k, addr);
                }
            }
        }
    }

    #[test]
    fn pointwise_dominations(tree in 0usize..4, p in picks()) {
        let (name, lo, hi) = TREES[tree];
        let w = window(name, lo, hi);
        let f = function_from(&w, &p);
        let fa = f.abs();
        let ev = Evaluator::new(&w, &f).unwrap();
        let ek = Evaluator::new(&w, &fa).unwrap();
        for x in w.ids() {
            let v = |k| ev.eval_id(k, x).value;
            let fx = rational::abs(&f.get(&w.address_of(x)));
            prop_assert!(v(OperatorKind::BCentred) <= v(OperatorKind::BuUncentred));
            prop_assert!(v(OperatorKind::BCentred) <= int(2) * v(OperatorKind::TCentred));
            prop_assert!(v(OperatorKind::TCentred) <= v(OperatorKind::UUncentred));
            prop_assert!(v(OperatorKind::TMod) <= v(OperatorKind::UMod));
            prop_assert!(v(OperatorKind::MHlCentred) <= v(OperatorKind::NHlUncentred));
            prop_assert!(fx <= v(OperatorKind::TCentred));
            prop_assert!(v(OperatorKind::UUncentred) <= ek.eval_id(OperatorKind::KKernel, x).value);
        }
    }

    #[test]
    fn operators_are_positively_homogeneous(tree in 0usize..4, p in picks(), c in 1i64..7, d in 1u64..5) {
        let (name, lo, hi) = TREES[tree];
        let w = window(name, lo, hi);
        let f = function_from(&w, &p);
        let s = rational::ratio(c, d);
        let g = f.scaled(&s);
        let ef = Evaluator::new(&w, &f).unwrap();
        let eg = Evaluator::new(&w, &g).unwrap();
        for x in w.ids() {
            for k in OperatorKind::ALL {
                prop_assert_eq!(eg.eval_id(k, x).value, &s * ef.eval_id(k, x).value);
            }
        }
    }
}

#[test]
fn delta_images_are_kernel_values() {
    for (name, lo, hi) in TREES {
        let w = window(name, lo, hi);
        for y in [w.apex(), VertexId((w.len() / 2) as u32), VertexId(w.len() as u32 - 1)] {
            let ya = w.address_of(y);
            let f = SparseFunction::delta(ya.clone());
            let ev = Evaluator::new(&w, &f).unwrap();
            for x in w.ids() {
                let xa = w.address_of(x);
                let kappa = treemax_core::ops::kernel_kappa(&w, &xa, &ya).unwrap();
                assert_eq!(ev.eval_id(OperatorKind::UUncentred, x).value, kappa, "{name} x={xa} y={ya}");
            }
        }
    }
}

#[test]
fn every_vertex_is_certified_for_a_central_delta_on_a_wide_window() {
    let w = window("Tb:2", -6, 6);
    let f = SparseFunction::delta("0".parse().unwrap());
    let ev = Evaluator::new(&w, &f).unwrap();
    let o = w.id_of(&"0".parse().unwrap()).unwrap();
    for k in [OperatorKind::TCentred, OperatorKind::UUncentred, OperatorKind::TMod, OperatorKind::UMod] {
        assert!(ev.eval_id(k, o).certified, "{k}");
    }
    assert_eq!(ev.eval_id(OperatorKind::TCentred, o).value, int(1));
}
