use proptest::prelude::*;
use proptest::sample::Index;

use solspace::adg::{
    classify, validate_adg, Adg, CompiledAdg, Defect, DesignVariable, DvKind, MappingRegistry, Node,
    NodeKind, Requirement,
};

fn vars() -> Vec<DesignVariable> {
    ["x1", "x2"]
        .iter()
        .map(|n| DesignVariable {
            name: n.to_string(),
            unit: "m".into(),
            kind: DvKind::Geometry,
            lower: -2.0,
            upper: 2.0,
        })
        .collect()
}

/// x1, x2 -> a = x1 + x2, b = x1 * x2 -> q1 = a + b, q2 = a^2
fn diamond() -> Adg {
    let node = |n: &str, k| Node::new(n, k);
    let edge = |a: &str, b: &str| (a.to_string(), b.to_string());
    Adg {
        nodes: vec![
            node("x1", NodeKind::Dv),
            node("x2", NodeKind::Dv),
            node("a", NodeKind::Intermediate),
            node("b", NodeKind::Intermediate),
            node("q1", NodeKind::Qoi),
            node("q2", NodeKind::Qoi),
        ],
        edges: vec![
            edge("x1", "a"),
            edge("x2", "a"),
            edge("x1", "b"),
            edge("x2", "b"),
            edge("a", "q1"),
            edge("b", "q1"),
            edge("a", "q2"),
        ],
        mappings: [("a", "sum"), ("b", "product"), ("q1", "sum"), ("q2", "square")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    }
}

fn shuffled<T: Clone>(items: &[T], picks: &[Index]) -> Vec<T> {
    let mut pool = items.to_vec();
    let mut out = Vec::with_capacity(pool.len());
    for pick in picks.iter().take(items.len()) {
        out.push(pool.remove(pick.index(pool.len())));
    }
    out.extend(pool);
    out
}

#[test]
fn diamond_evaluates_in_dependency_order() {
    let reg = MappingRegistry::standard();
    let report = validate_adg(&diamond(), &reg);
    let order = report.order.unwrap();
    let pos = |n: &str| order.iter().position(|o| o == n).unwrap();
    assert!(pos("x1") < pos("a") && pos("a") < pos("q1") && pos("b") < pos("q1"));
    let g = CompiledAdg::new(&diamond(), &reg, &vars()).unwrap();
    let q = g.evaluate(&[1.5, -0.5]);
    assert_eq!(q.get("q1"), Some(1.0 - 0.75));
    assert_eq!(q.get("q2"), Some(1.0));
}

#[test]
fn cycle_is_reported_with_its_members() {
    let mut adg = diamond();
    adg.edges.push(("q1".into(), "a".into()));
    adg.nodes[4].kind = NodeKind::Intermediate;
    let report = validate_adg(&adg, &MappingRegistry::standard());
    assert!(report.order.is_none());
    let cycle = report
        .defects
        .iter()
        .find_map(|d| match d {
            Defect::Cycle { nodes } => Some(nodes.clone()),
            _ => None,
        })
        .unwrap();
    assert_eq!(cycle, vec!["a".to_string(), "q1".to_string()]);
}

proptest! {
    #[test]
    fn order_of_declaration_does_not_change_results(
        node_picks in prop::collection::vec(any::<Index>(), 6),
        edge_picks in prop::collection::vec(any::<Index>(), 7),
        x1 in -2.0f64..2.0,
        x2 in -2.0f64..2.0,
    ) {
        let reg = MappingRegistry::standard();
        let base = diamond();
        let perm = Adg {
            nodes: shuffled(&base.nodes, &node_picks),
            edges: shuffled(&base.edges, &edge_picks),
            mappings: base.mappings.clone(),
        };
        let a = CompiledAdg::new(&base, &reg, &vars()).unwrap().evaluate(&[x1, x2]);
        let b = CompiledAdg::new(&perm, &reg, &vars()).unwrap().evaluate(&[x1, x2]);
        prop_assert_eq!(validate_adg(&base, &reg).order, validate_adg(&perm, &reg).order);
        for q in ["q1", "q2"] {
            prop_assert_eq!(a.get(q).map(f64::to_bits), b.get(q).map(f64::to_bits));
        }
    }

    #[test]
    fn evaluation_is_pure(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        let g = CompiledAdg::new(&diamond(), &MappingRegistry::standard(), &vars()).unwrap();
        prop_assert_eq!(g.evaluate(&[x1, x2]), g.evaluate(&[x1, x2]));
    }

    #[test]
    fn loosening_a_threshold_never_turns_good_into_bad(
        x1 in -2.0f64..2.0,
        x2 in -2.0f64..2.0,
        t in -5.0f64..5.0,
        slack in 0.0f64..5.0,
    ) {
        let g = CompiledAdg::new(&diamond(), &MappingRegistry::standard(), &vars()).unwrap();
        let q = g.evaluate(&[x1, x2]);
        let tight = classify(&q, &[Requirement::less_equal("q1", t), Requirement::less_equal("q2", t)]);
        let loose = classify(
            &q,
            &[Requirement::less_equal("q1", t + slack), Requirement::less_equal("q2", t + slack)],
        );
        prop_assert!(loose.violated.is_subset(&tight.violated));
    }
}
