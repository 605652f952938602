use phipower::phi::{builtin_suite, materialize_phi};
use phipower::verify::{verify, Status, VerifyOptions};

#[test]
fn every_builtin_weight_passes_the_suite() {
    for (k, case) in builtin_suite().into_iter().enumerate() {
        let g = case.grid(257).unwrap();
        let phi = materialize_phi(&case.spec, &g).unwrap();
        let opts = VerifyOptions { spectra: k == 0, ..VerifyOptions::default() };
        let rep = verify(&phi, &opts).unwrap();
        let bad: Vec<_> = rep.entries.iter().filter(|e| e.status == Status::Fail).collect();
        assert!(bad.is_empty(), "{}: {bad:#?}", case.name);
        if case.is_real() {
            assert_eq!(rep.skipped, if k == 0 { 0 } else { 3 }, "{}", case.name);
        }
    }
}
