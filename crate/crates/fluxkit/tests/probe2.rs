use fluxkit::circuit::CircuitDesign;
use fluxkit::fullmodel::*;
use fluxkit::spectrum::compute_spectrum;
use std::f64::consts::PI;

#[test]
fn probe_worst_cell() {
    for (ic, csh, cj, cg) in [
        (150.0, 5.0, 30.0, 0.0),
    ] {
        for (n, r) in [(2usize, 0.9), (2, 1.0), (2, 1.1), (3, 0.9), (3, 1.0), (3, 1.1)] {
            let d = CircuitDesign::new(ic, csh, cj, cg, n, r * n as f64, PI).unwrap();
            let spec = build_full_circuit(&d).unwrap();
            let (sol, _, _) = solve_full_converged(&spec, 3, 1e-5, 100_000, &FullSolveOptions::default()).unwrap();
            let fw = sol.values[1] - sol.values[0];
            let fa = (sol.values[2] - sol.values[1]) - fw;
            let s = compute_spectrum(&d, 3, 1e-5).unwrap();
            let dw = (fw - s.qubit_frequency_ghz).abs() / s.qubit_frequency_ghz * 100.0;
            let da = (fa - s.anharmonicity_ghz).abs() / s.anharmonicity_ghz.abs() * 100.0;
            println!("ic={ic} csh={csh} cj={cj} cg={cg} N={n} r={r}: w01 {fw:.3}|{:.3} dev={dw:.1}%  A {fa:.3}|{:.3} dev={da:.1}%", s.qubit_frequency_ghz, s.anharmonicity_ghz);
        }
    }
}
