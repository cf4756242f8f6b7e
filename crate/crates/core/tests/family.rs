use superindex::chern::clifford_supertrace;
use superindex::examples::{constant_spectrum_family, random_superconnection, spectral_flow_family, RandomOptions};
use superindex::family::cocycle::IndexOptions;
use superindex::family::{assemble_index, refinement_check, spectral_scan, FamilySample, Grid};
use superindex::json::{self, ExampleRef, ProblemSpec};

/// Random families over an interval whose Clifford degree is odd, so that the
/// eta and Chern identities have nonzero content in degree one.
fn odd_random_families() -> Vec<FamilySample> {
    let opts = RandomOptions { max_rank: 4, max_m: 1, max_degree: 2, real: false, scale: 0.8 };
    let mut out = Vec::new();
    for seed in 0..40u64 {
        let a = random_superconnection(seed, &opts).unwrap();
        if a.signature().m != 1 || a.bundle().module.algebra.degree().rem_euclid(2) != 1 {
            continue;
        }
        let grid = Grid::new(vec![(-1.0, 1.0)], vec![16], false).unwrap();
        let fam = FamilySample::new(&format!("random({seed})"), grid, a, 2, 0.02).unwrap();
        let jet = fam.jet_at(&[0.3]).unwrap();
        let ch = clifford_supertrace(jet.bundle(), &jet.heat(1.0).unwrap());
        if ch.form_part(1).max_abs() < 1e-3 {
            continue;
        }
        out.push(fam);
        if out.len() == 3 {
            break;
        }
    }
    out
}

fn top_level(fam: &FamilySample) -> f64 {
    let scan = spectral_scan(fam).unwrap();
    scan.iter().flat_map(|p| p.values.last().copied()).fold(0.0, f64::max) + 1.0
}

#[test]
fn odd_degree_random_families_satisfy_the_cocycle_identities() {
    let fams = odd_random_families();
    assert!(fams.len() >= 2);
    for fam in &fams {
        let lambda = top_level(fam);
        let c = assemble_index(fam, &[lambda], IndexOptions::default()).unwrap();
        assert!(c.cech.max() < 1e-6, "{}: {:?}", fam.name, c.cech);
        let rec = c.chart(lambda).unwrap();
        // Above the whole spectrum the cutoff is everything, so the identity
        // relates two nonzero degree-one forms.
        let nonzero = rec.local.values().any(|l| (&l.chern - &l.chern_cutoff).form_part(1).max_abs() > 1e-6);
        assert!(nonzero, "{} is vacuous", fam.name);
        for l in rec.local.values() {
            assert!(l.satisfies_residual < 1e-6, "{}: {}", fam.name, l.satisfies_residual);
        }
    }
}

#[test]
fn odd_degree_random_families_glue_across_two_levels() {
    let mut exercised = 0;
    for fam in odd_random_families() {
        let top = top_level(&fam);
        let scan = spectral_scan(&fam).unwrap();
        // A second level inside a spectral gap, if one is wide enough at every point.
        let low = scan.iter().flat_map(|p| p.values.first().copied()).fold(f64::INFINITY, f64::min);
        if low <= 3.0 * fam.margin {
            continue;
        }
        let lambda = low / 2.0;
        let c = assemble_index(&fam, &[lambda, top], IndexOptions::default()).unwrap();
        assert!(c.cech.max() < 1e-6, "{}: {:?}", fam.name, c.cech);
        assert!(c.gluing_report().max() < 1e-8);
        let r = refinement_check(&fam, &[top], &[lambda, top], IndexOptions::default()).unwrap();
        assert!(r.classes_agree() && r.coboundary < 1e-6);
        exercised += 1;
    }
    assert!(exercised > 0);
}

#[test]
fn empty_cutoff_reduces_to_the_global_chern_form() {
    // Below the spectrum the cutoff bundle is zero and dη = Ch(𝔸).
    let fam = constant_spectrum_family(1.0, 9).unwrap();
    let c = assemble_index(&fam, &[0.5], IndexOptions::default()).unwrap();
    let rec = c.chart(0.5).unwrap();
    for l in rec.local.values() {
        assert!(l.chern_cutoff.max_abs() < 1e-12);
        assert!((&l.eta.d() - &l.chern).max_abs() < 1e-6);
    }
}

#[test]
fn family_json_round_trip() {
    let fam = spectral_flow_family(1.0, 16).unwrap();
    let text = serde_json::to_string(&json::family_to_json(&fam)).unwrap();
    let back = json::family_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.margin, fam.margin);
    for idx in 0..fam.grid.num_points() {
        assert_eq!(back.a0_at(idx), fam.a0_at(idx));
    }
}

#[test]
fn problem_spec_accepts_exactly_one_input() {
    let spec = ProblemSpec::parse(r#"{"example": {"name": "spectral_flow", "resolution": 32}, "lambdas": [0.25, 0.5625]}"#)
        .unwrap();
    assert!(matches!(spec.build().unwrap(), json::Example::Family(_)));
    let both = r#"{"example": {"name": "random"}, "supercharge": {"matrix": [[[0,0]]], "p": 1, "q": 0}}"#;
    assert!(ProblemSpec::parse(both).is_err());
    assert!(ProblemSpec::parse("{}").is_err());
    assert!(ExampleRef::named("torus").build().is_err());
}

#[test]
fn cocycle_report_serializes_deterministically() {
    let fam = spectral_flow_family(1.0, 24).unwrap();
    let opts = IndexOptions::default();
    let c = assemble_index(&fam, &[0.25, 0.5625], opts).unwrap();
    let a = serde_json::to_string(&json::cocycle_to_json(&fam, &c, &opts)).unwrap();
    let c2 = assemble_index(&fam, &[0.25, 0.5625], opts).unwrap();
    let b = serde_json::to_string(&json::cocycle_to_json(&fam, &c2, &opts)).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], json::SCHEMA_VERSION);
    assert_eq!(v["charts"].as_array().unwrap().len(), 2);
}
