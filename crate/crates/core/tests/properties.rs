//! Property tests over randomly drawn plans and gradings.

use proptest::prelude::*;
use utgrading::constructions::{elementary_grading, tensor_grading, DivisionRealization};
use utgrading::decompose::decompose_with;
use utgrading::graded::{jacobson_radical, BlockStructure, UTGrading};
use utgrading::group::{Group, GroupElement};
use utgrading::linalg::{Matrix, Subspace};
use utgrading::par::Execution;
use utgrading::scalar::Field;
use utgrading::verify::{
    check_graded_iso, generate_instance, run_plan, ConjugatorChoice, DivisionChoice, GradedLinearMap, InstancePlan,
};

const SHAPES: &[&[usize]] = &[&[1], &[2], &[1, 1], &[2, 1], &[1, 2], &[1, 1, 1], &[3], &[2, 2], &[1, 2, 1]];

fn group_choice(k: usize) -> (Group, Vec<GroupElement>) {
    let idx = GroupElement::Index;
    match k % 4 {
        0 => (Group::klein_four(), (0..4).map(idx).collect()),
        1 => (Group::cyclic(4), (0..4).map(idx).collect()),
        2 => (Group::symmetric3(), (0..6).map(idx).collect()),
        _ => (Group::free_abelian(1), (-3..=3).map(|x| GroupElement::Vector(vec![x])).collect()),
    }
}

prop_compose! {
    fn plans()(
        seed in any::<u64>(),
        g in 0usize..4,
        shape in 0..SHAPES.len(),
        picks in proptest::collection::vec(0usize..16, 6),
        div in 0usize..3,
        rational in any::<bool>(),
    ) -> InstancePlan {
        let (group, pool) = group_choice(g);
        let blocks = SHAPES[shape].to_vec();
        let n: usize = blocks.iter().sum();
        let eta = picks[..n].iter().map(|&i| pool[i % pool.len()].clone()).collect();
        let idx = GroupElement::Index;
        let division = match (div, g) {
            (1, 0) => DivisionChoice::Pauli { a: idx(1), b: idx(2) },
            (2, 0) => DivisionChoice::Quadratic { a: idx(3), c: None },
            (2, 1) => DivisionChoice::Quadratic { a: idx(2), c: None },
            (2, 2) => DivisionChoice::Quadratic { a: idx(3), c: None },
            _ => DivisionChoice::Trivial,
        };
        let field = if rational { Field::Rationals } else { Field::prime(211).unwrap() };
        InstancePlan { seed, field, group, blocks, eta, division, conjugator: ConjugatorChoice::Random }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_gradings_validate_and_round_trip(plan in plans()) {
        let inst = generate_instance(&plan).unwrap();
        let g = &inst.grading;
        let reparsed = UTGrading::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(reparsed.to_json(), g.to_json());
        let total: usize = g.component_dims().iter().map(|(_, d)| d).sum();
        prop_assert_eq!(total, g.blocks().dim());
        prop_assert!(g.field().char_precondition(g.dim()));
        prop_assert!(g.is_subspace_graded(&jacobson_radical(g.field(), g.blocks())).graded);
    }

    #[test]
    fn decomposition_recovers_the_plant(plan in plans()) {
        let report = run_plan("prop", &plan, Execution::Sequential, false).unwrap();
        prop_assert!(report.pass(), "{}", report.to_json());
        let inst = generate_instance(&plan).unwrap();
        let cf = decompose_with(&inst.grading, Execution::Sequential).unwrap();
        let s2 = cf.division.dim();
        let s = (1..=s2).find(|s| s * s == s2).unwrap();
        let sizes = inst.grading.blocks().sizes();
        for (n, p) in sizes.iter().zip(&cf.blocks_prime) {
            prop_assert_eq!(*n, p * s);
        }
    }

    #[test]
    fn annihilators_of_graded_subspaces_are_graded(plan in plans(), mask in any::<u64>()) {
        let g = generate_instance(&plan).unwrap().grading;
        let chosen = g.basis().iter().enumerate().filter(|(k, _)| mask >> (k % 64) & 1 == 1);
        let w = Subspace::span(g.field(), g.blocks().dim(), chosen.map(|(_, b)| g.blocks().coords(b)));
        prop_assert!(g.is_subspace_graded(&w).graded);
        prop_assert!(g.is_subspace_graded(&g.right_annihilator(&w)).graded);
    }

    #[test]
    fn tensor_with_the_base_field_is_elementary(g in 0usize..4, shape in 0..SHAPES.len(), picks in proptest::collection::vec(0usize..16, 6)) {
        let (group, pool) = group_choice(g);
        let blocks = BlockStructure::new(SHAPES[shape].to_vec()).unwrap();
        let seq: Vec<GroupElement> = picks[..blocks.n()].iter().map(|&i| pool[i % pool.len()].clone()).collect();
        let f = Field::Rationals;
        let tensor = tensor_grading(&blocks, &seq, &DivisionRealization::trivial(f, &group)).unwrap();
        let elementary = elementary_grading(f, &group, &blocks, &seq).unwrap();
        prop_assert_eq!(tensor.basis(), elementary.basis());
        prop_assert_eq!(tensor.degrees(), elementary.degrees());
    }

    #[test]
    fn graded_isomorphisms_compose(plan in plans(), shuffle in any::<u64>()) {
        let g = generate_instance(&plan).unwrap().grading;
        let f = g.field();
        let d = g.dim();
        let cf = decompose_with(&g, Execution::Sequential).unwrap();
        // a homogeneous change of basis: within each component add a
        // multiple of one basis element to the next
        let mut q = Matrix::identity(f, d);
        for (_, idxs) in g.component_dims().iter().map(|(deg, _)| (deg, g.component_indices(deg))) {
            for w in idxs.windows(2) {
                let c = f.from_i64((shuffle >> (w[0] % 60) & 3) as i64);
                q.set(w[0], w[1], c);
            }
        }
        let rebased: Vec<(Matrix, GroupElement)> = (0..d)
            .map(|k| {
                let mut m = Matrix::zeros(f, g.blocks().n(), g.blocks().n());
                for (j, b) in g.basis().iter().enumerate() {
                    m.axpy(q.get(j, k), b);
                }
                (m, g.degrees()[k].clone())
            })
            .collect();
        let h = UTGrading::new(f, g.group().clone(), g.blocks().clone(), rebased).unwrap();
        // coordinates along h are Q^-1 times coordinates along g
        let to_h = q.inverse().unwrap();
        let step = GradedLinearMap { source: &g, target: &h, matrix: &to_h };
        prop_assert_eq!(check_graded_iso(&step, Execution::Sequential).unwrap(), None);
        let composed = &to_h * &cf.psi;
        let both = GradedLinearMap { source: &cf.algebra, target: &h, matrix: &composed };
        prop_assert_eq!(check_graded_iso(&both, Execution::Sequential).unwrap(), None);
    }

    #[test]
    fn plans_are_byte_reproducible(plan in plans()) {
        let text = plan.to_json().to_string();
        let again = InstancePlan::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        let a = generate_instance(&plan).unwrap();
        let b = generate_instance(&again).unwrap();
        prop_assert_eq!(a.grading.to_json().to_string(), b.grading.to_json().to_string());
        prop_assert_eq!(a.plant.to_json().to_string(), b.plant.to_json().to_string());
    }
}
