use num_complex::Complex64;

use superindex::chern::{geometric_grid, partition_function, witten_index};
use superindex::examples::{
    circle_dirac, constant_spectrum_family, spectral_flow_family, susy_oscillator, CircleGrading, Spin,
};
use superindex::family::cocycle::IndexOptions;
use superindex::family::{assemble_index, flows_to_zero, rg_cutoff_check, spectral_scan};
use superindex::linalg;
use superindex::oracles::DenseRing;
use superindex::{AbsGroup, Error, RingElement, RingSignature};

#[test]
fn odd_coefficient_of_a_product() {
    let sig = RingSignature::new(1, 2, &["theta", "eta"]).unwrap();
    let theta = RingElement::odd(&sig, "theta").unwrap();
    let eta = RingElement::odd(&sig, "eta").unwrap();
    let x = RingElement::x(&sig, 0);
    let a = &(&theta * &eta) * &x;
    let a1 = a.odd_coefficient("theta").unwrap();
    assert!(a1.approx_eq(&(&eta * &x), 0.0));
    // Recombine through the dense structure constants.
    let dense = DenseRing::new(&sig).unwrap();
    let back = dense.from_dense(&dense.mul(&dense.to_dense(&theta), &dense.to_dense(&a1)));
    assert!(back.approx_eq(&a, 0.0));
    assert!(a.odd_coefficient("eta").unwrap().approx_eq(&(&theta * &x).scale_re(-1.0), 0.0));
}

#[test]
fn oscillator_spectrum_and_index() {
    for n in [2, 3, 8, 16] {
        let s = susy_oscillator(n).unwrap();
        let (vals, _) = linalg::herm_eig(&(&s.matrix * &s.matrix));
        // Even modes 0..N−1 and odd modes 1..N−1.
        let mut want: Vec<f64> = (0..n).map(|k| k as f64).chain((1..n).map(|k| k as f64)).collect();
        want.sort_by(f64::total_cmp);
        for (v, w) in vals.iter().zip(&want) {
            assert!((v - w).abs() < 1e-10, "{v} vs {w}");
        }
        let r = witten_index(&s.matrix, s.p, s.q, &[0.05, 1.0, 20.0]).unwrap();
        assert_eq!((r.index, r.even_kernel, r.odd_kernel), (1, 1, 0));
        // sTr e^{−tQ²} = 1 + Σ_{k≥1}(e^{−tk} − e^{−tk}).
        assert!(r.partition.iter().all(|&(_, z)| (z - 1.0).abs() < 1e-12));
    }
}

#[test]
fn circle_kernels() {
    let ts = geometric_grid(0.05, 20.0, 12);
    let cases = [
        (Spin::Periodic, CircleGrading::Spinor, (1, 1)),
        (Spin::Periodic, CircleGrading::ZeroModeEven, (2, 0)),
        (Spin::Antiperiodic, CircleGrading::Spinor, (0, 0)),
    ];
    for (spin, grading, kernel) in cases {
        for n in [1, 2, 5] {
            let s = circle_dirac(n, spin, grading).unwrap();
            let r = witten_index(&s.matrix, s.p, s.q, &ts).unwrap();
            assert_eq!((r.even_kernel, r.odd_kernel), kernel, "{}", s.name);
            assert!(r.max_drift < 1e-10);
        }
    }
}

#[test]
fn spinor_circle_is_clifford_linear() {
    let s = circle_dirac(3, Spin::Periodic, CircleGrading::Spinor).unwrap();
    let m = s.module.as_ref().unwrap();
    assert!(m.relations_residual() < 1e-14);
    assert!(m.clifford_linear_residual(&s.matrix) < 1e-14);
    let a = s.superconnection().unwrap();
    assert!(a.validate(1e-12).is_ok());
    // On a point, Z is the Clifford supertrace of the heat kernel: the
    // generator pairs the two zero modes, so it vanishes.
    let z = partition_function(&a, 0.7).unwrap();
    assert!(z.max_abs() < 1e-12);
}

#[test]
fn point_partition_function_matches_mode_sum() {
    let s = circle_dirac(2, Spin::Periodic, CircleGrading::ZeroModeEven).unwrap();
    let a = s.superconnection().unwrap();
    for ell in [0.1, 1.0, 4.0] {
        let z = partition_function(&a, ell).unwrap();
        let (body, nil) = z.body_nil_split();
        assert!(nil.is_zero());
        assert!((body - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn spectral_flow_rank_table() {
    let fam = spectral_flow_family(1.0, 64).unwrap();
    let h = fam.grid.spacing(0);
    assert!((fam.margin - h).abs() < 1e-15);
    let cocycle = assemble_index(&fam, &[0.25, 0.5625], IndexOptions::default()).unwrap();
    for lambda in [0.25, 0.5625] {
        let ch = cocycle.chart(lambda).unwrap();
        // Charts split into {x² < λ} with rank (1,1) and the two outer pieces.
        assert_eq!(ch.bundle.components.len(), 3);
        let mut ranks = ch.bundle.ranks.clone();
        ranks.sort();
        assert_eq!(ranks, vec![(0, 0), (0, 0), (1, 1)]);
    }
    assert_eq!(cocycle.n, 0);
}

#[test]
fn constant_spectrum_cover_cases() {
    let fam = constant_spectrum_family(1.0, 17).unwrap();
    // λ = 1 sits on the spectrum everywhere.
    let err = assemble_index(&fam, &[1.0], IndexOptions::default()).unwrap_err();
    let root = match err {
        Error::Stage { source, .. } => *source,
        e => e,
    };
    assert!(matches!(root, Error::Cover(_)), "{root}");
    for (lambda, rank) in [(0.5, (0, 0)), (2.0, (1, 1)), (5.0, (2, 2))] {
        let c = assemble_index(&fam, &[lambda], IndexOptions::default()).unwrap();
        let ch = c.chart(lambda).unwrap();
        assert_eq!(ch.bundle.ranks, vec![rank]);
        assert!(c.cech.max() < 1e-6);
    }
}

#[test]
fn rg_of_constant_spectrum_moves_the_threshold() {
    let fam = constant_spectrum_family(1.0, 17).unwrap();
    let r = rg_cutoff_check(&fam, 2.0, 5.0).unwrap();
    assert_eq!(r.forced_threshold, 1.25);
    assert!(r.span_distance < 1e-10 && r.connection_difference < 1e-10);
    // Cutting RG² 𝔸 at 5 keeps the eigenvalue 4·1 but not 4·4; cutting 𝔸 at
    // μλ = 10 keeps both.
    assert!(r.linear_span_distance > 0.5);
    let scaled = spectral_scan(&fam.rg(2.0).unwrap()).unwrap();
    assert!(scaled.iter().all(|p| p.values.iter().filter(|&&v| v < 5.0).count() == 2));
}

#[test]
fn flows_to_zero_cases() {
    let sf = spectral_flow_family(1.0, 64).unwrap();
    let all: Vec<usize> = (0..64).collect();
    let r = flows_to_zero(&sf, &all).unwrap();
    assert!(!r.flows_to_zero && r.witness_mu.is_none());
    let r = flows_to_zero(&sf, &(40..64).collect::<Vec<_>>()).unwrap();
    assert!(r.flows_to_zero && r.witness_confirmed);
    let cs = constant_spectrum_family(1.0, 17).unwrap();
    let r = flows_to_zero(&cs, &(0..17).collect::<Vec<_>>()).unwrap();
    assert!(r.flows_to_zero && r.witness_confirmed);
    assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
    assert!((r.witness_mu.unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn spectral_flow_fibers_have_class_zero() {
    let fam = spectral_flow_family(1.0, 32).unwrap();
    let c = assemble_index(&fam, &[0.5, 2.0], IndexOptions::default()).unwrap();
    let ch = c.chart(0.5).unwrap();
    for &idx in &ch.bundle.components.concat() {
        let cls = ch.bundle.fiber_class(&fam, idx).unwrap();
        assert_eq!(cls.group, AbsGroup::Z);
        assert_eq!(cls.value, 0);
    }
}
