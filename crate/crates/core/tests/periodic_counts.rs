use meanorbit::certify::{self, DEFAULT_DEPTH};
use meanorbit::periodic::{self, DEDUP_TOL_Y};
use meanorbit::symbolic::{self, Mode};
use meanorbit::{Conjugate, MapParams};

fn third() -> MapParams {
    MapParams::new(30.0, 1.0 / 3.0).unwrap()
}

#[test]
fn solutions_in_j_cover_lucas_bound() {
    let p = third();
    let cert = certify::certify(&p, DEFAULT_DEPTH).unwrap();
    let js = cert.native_intervals().unwrap();
    let g = Conjugate(p);
    for n in 1..=10usize {
        let s = periodic::find_periodic(&g, n, &js, periodic::default_grid(n), DEDUP_TOL_Y).unwrap();
        let found = s.solutions.len() as u64;
        let lucas: u64 = symbolic::lucas(n as u64).try_into().unwrap();
        assert!(found >= lucas, "n={n}: {found} < {lucas}");
        // every solution carries a cyclic admissible itinerary of length n
        for &y in &s.solutions {
            let w = certify::itinerary(&cert, y, n).unwrap();
            assert!(symbolic::is_admissible(w.symbols(), Mode::Cyclic), "n={n} y={y} {w}");
        }
    }
}

#[test]
fn whole_line_search_contains_k_orbits() {
    let p = third();
    let cert = certify::certify(&p, DEFAULT_DEPTH).unwrap();
    let js = cert.native_intervals().unwrap();
    let g = Conjugate(p);
    let whole = [periodic::conjugate_search_interval(&p)];
    for n in [3usize, 6] {
        let in_k = periodic::find_periodic(&g, n, &js, periodic::default_grid(n), DEDUP_TOL_Y).unwrap();
        let all = periodic::find_periodic(&g, n, &whole, periodic::default_grid(n), DEDUP_TOL_Y).unwrap();
        assert!(all.solutions_in(&js) >= in_k.solutions.len());
        for y in &in_k.solutions {
            assert!(all.solutions.iter().any(|z| (z - y).abs() < 1e-8));
        }
    }
}

#[test]
fn mirror_orbits_match() {
    let p = MapParams::new(30.0, 0.25).unwrap();
    for n in 1..=5 {
        let a = periodic::replicator_orbits(&p, n, periodic::default_grid(n)).unwrap();
        let b = periodic::replicator_orbits(&p.mirrored(), n, periodic::default_grid(n)).unwrap();
        assert_eq!(a.orbits.len(), b.orbits.len(), "n={n}");
        for o in &a.orbits {
            let mut image: Vec<f64> = o.points.iter().map(|x| 1.0 - x).collect();
            let i = image.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
            image.rotate_left(i);
            let matched = b.orbits.iter().any(|q| q.points.iter().zip(&image).all(|(u, v)| (u - v).abs() <= 1e-9));
            assert!(matched, "n={n}: {:?}", o.points);
        }
    }
}
