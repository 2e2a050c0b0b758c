mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rarrival::flow::{
    flow_from_json, flow_to_json, verify_component_flow, verify_recursive_flow, verify_run_like, Classification,
    ComponentFlowStatus,
};
use rarrival::gen::{random_instance, GenParams};
use rarrival::line::{adv, prev, Line};
use rarrival::model::{parse_instance, validate};
use rarrival::{Instance, OverflowPoly};

const LINEAR: OverflowPoly = OverflowPoly::Linear;

fn instance(seed: u64) -> Instance {
    random_instance(&mut StdRng::seed_from_u64(seed), &GenParams::default())
}

fn points(inst: &Instance) -> Vec<(rarrival::Flow, rarrival::flow::RunLikeStatus)> {
    Line::new(inst, LINEAR).unwrap().take(3000).map(|p| p.unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adv_and_prev_are_inverse(seed in any::<u64>()) {
        let inst = instance(seed);
        let pts = points(&inst);
        for w in pts.windows(2) {
            prop_assert_eq!(&adv(&inst, &w[0].0, LINEAR).unwrap(), &w[1].0);
            prop_assert_eq!(&prev(&inst, &w[1].0, LINEAR).unwrap(), &w[0].0);
        }
        prop_assert_eq!(&prev(&inst, &pts[0].0, LINEAR).unwrap(), &pts[0].0);
        let last = &pts[pts.len() - 1];
        if last.1.classification.is_finished() {
            prop_assert_eq!(&adv(&inst, &last.0, LINEAR).unwrap(), &last.0);
        }
    }

    #[test]
    fn val_rises_by_one(seed in any::<u64>()) {
        let inst = instance(seed);
        for (i, (x, _)) in points(&inst).iter().enumerate() {
            prop_assert_eq!(x.val(), i as u64);
        }
    }

    #[test]
    fn run_like_implies_recursive_implies_component(seed in any::<u64>()) {
        let inst = instance(seed);
        for (x, st) in points(&inst) {
            prop_assert!(st.is_run_like());
            prop_assert!(verify_recursive_flow(&inst, &x).unwrap().is_ok());
            for (l, c) in inst.components().iter().enumerate() {
                let ok = !matches!(verify_component_flow(c, x.part(l)), Ok(ComponentFlowStatus::Invalid(_)));
                prop_assert!(ok);
            }
        }
    }

    #[test]
    fn complete_and_lassoed_exclude(seed in any::<u64>()) {
        let inst = instance(seed);
        for (_, st) in points(&inst) {
            let s = &st.structure;
            let lassoed = s.is_lassoed();
            let complete = s.is_complete();
            prop_assert!(!(lassoed && complete));
            prop_assert_eq!(matches!(st.classification, Classification::Complete { .. }), complete);
        }
    }

    #[test]
    fn last_used_edges_exist_off_zero(seed in any::<u64>()) {
        let inst = instance(seed);
        for (x, _) in points(&inst) {
            for (l, c) in inst.components().iter().enumerate() {
                let lue = rarrival::flow::last_used_edge_graph(c, x.part(l)).unwrap();
                prop_assert_eq!(lue.is_empty(), x.part_is_zero(l));
            }
        }
    }

    #[test]
    fn flow_json_round_trip(seed in any::<u64>()) {
        let inst = instance(seed);
        for (x, _) in points(&inst).into_iter().step_by(7) {
            prop_assert_eq!(flow_from_json(&inst, &flow_to_json(&inst, &x)).unwrap(), x);
        }
    }

    #[test]
    fn text_and_validation_are_stable(seed in any::<u64>()) {
        let inst = instance(seed);
        let raw = inst.to_raw();
        prop_assert!(validate(&raw).is_ok());
        let again = parse_instance(&inst.to_text()).unwrap();
        prop_assert_eq!(validate(&again.to_raw()), validate(&raw));
        prop_assert_eq!(again, inst);
    }

    #[test]
    fn classification_is_deterministic(seed in any::<u64>()) {
        let inst = instance(seed);
        for (x, st) in points(&inst).into_iter().step_by(11) {
            prop_assert_eq!(verify_run_like(&inst, &x, LINEAR).unwrap(), st);
        }
    }
}
