use irisparse::recognition::{encode, match_prepared, normalize, verification_stats, EncodeParams, PreparedTemplate};
use irisparse::synth::{generate_rotated, CorruptionSpec, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rotated_samples_separate_subjects() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut templates = Vec::new();
    for subject in 0..30u64 {
        let spec = SynthSpec::random(subject, 200, 160, CorruptionSpec::default());
        for _ in 0..3 {
            let deg = rng.gen_range(0.0..=8.0);
            let case = generate_rotated(&spec, deg).unwrap();
            let n = normalize(&case.image, &case.gt.mask, &case.gt.inner, &case.gt.outer, 64, 512).unwrap();
            let t = encode(&n, &EncodeParams::default()).unwrap();
            templates.push((subject, PreparedTemplate::new(&t, 16)));
        }
    }
    let (mut gen, mut imp) = (Vec::new(), Vec::new());
    for i in 0..templates.len() {
        for j in i + 1..templates.len() {
            let s = match_prepared(&templates[i].1, &templates[j].1).unwrap();
            if templates[i].0 == templates[j].0 { gen.push(s.hd) } else { imp.push(s.hd) }
        }
    }
    let st = verification_stats(&gen, &imp).unwrap();
    let gmax = gen.iter().cloned().fold(0.0, f64::max);
    let imin = imp.iter().cloned().fold(1.0, f64::min);
    eprintln!("eer {} di {} genuine max {gmax} impostor min {imin}", st.eer, st.di);
    assert!(st.eer <= 0.05 && st.di >= 1.5);
}
