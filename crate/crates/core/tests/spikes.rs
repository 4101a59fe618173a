mod common;

use std::sync::Arc;

use plasma_lab::emden::{EmdenProfile, GroundState, SpikeFamily};
use plasma_lab::spikes::{detect_spikes, Excised, FamilyField, RescaledField, SpikeOptions, Superposition};
use proptest::prelude::*;

fn ground() -> GroundState {
    GroundState::new(Arc::new(EmdenProfile::shoot(3, 2.0, 1e-10).unwrap()), 0.0).unwrap()
}

fn field(family: &SpikeFamily, centers: &[[f64; 3]], mu: f64) -> RescaledField {
    let parts = centers.iter().map(|c| FamilyField::new(family.clone(), c.to_vec())).collect();
    RescaledField::synthetic(Box::new(Superposition { parts }), 2.0, mu, "test")
}

#[test]
fn detection_exhausts_the_spikes() {
    let g = ground();
    let fam = SpikeFamily::new(g.clone(), 1e6).unwrap();
    let centers = [[0.4, 0.0, 0.0], [-0.4, 0.0, 0.0]];
    let rf = field(&fam, &centers, 1e6);
    let opts = SpikeOptions::default();
    let report = detect_spikes(&rf, &g, opts).unwrap();
    assert_eq!(report.count(), 2);
    let parts = centers.iter().map(|c| FamilyField::new(fam.clone(), c.to_vec())).collect();
    let inner: &'static Superposition = Box::leak(Box::new(Superposition { parts }));
    let radius = opts.merge_factor * report.window * report.eps;
    let cut = Excised { inner, balls: report.spikes.iter().map(|s| (s.z.clone(), radius)).collect() };
    let rest = RescaledField::synthetic(Box::new(cut), 2.0, 1e6, "excised");
    assert_eq!(detect_spikes(&rest, &g, opts).unwrap().count(), 0);
}

fn shared_ground() -> &'static GroundState {
    static G: std::sync::OnceLock<GroundState> = std::sync::OnceLock::new();
    G.get_or_init(ground)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sigma_is_additive(k in 1usize..4, turn in 0.0f64..6.28) {
        let g = shared_ground();
        let fam = SpikeFamily::new(g.clone(), 1e6).unwrap();
        let centers: Vec<[f64; 3]> = (0..k)
            .map(|i| {
                let t = turn + i as f64 * 2.0 * std::f64::consts::PI / 3.0;
                [0.4 * t.cos(), 0.4 * t.sin(), 0.0]
            })
            .collect();
        let report = detect_spikes(&field(&fam, &centers, 1e6), g, SpikeOptions::default()).unwrap();
        prop_assert_eq!(report.count(), k);
        prop_assert!((report.quantum / k as f64 - 1.0).abs() <= 0.05, "quantum {}", report.quantum);
    }
}
