//! Every example under examples/ runs to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().expect(concat!(stringify!($name), " example should run"));
        }
    };
}

example!(lane_emden, "../examples/lane_emden.rs");
example!(ball_branch, "../examples/ball_branch.rs");
example!(sobolev_constants, "../examples/sobolev_constants.rs");
example!(thresholds, "../examples/thresholds.rs");
example!(grid_continuation, "../examples/grid_continuation.rs");
example!(spike_detection, "../examples/spike_detection.rs");
example!(harmonic_centers, "../examples/harmonic_centers.rs");
example!(custom_domain, "../examples/custom_domain.rs");
