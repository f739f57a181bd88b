use super::*;
use crate::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn path(lengths: &[f64], masses: &[f64]) -> WTree {
    let n = lengths.len() + 1;
    let parent = (0..n).map(|v| v.checked_sub(1)).collect();
    let mut el = vec![0.0];
    el.extend_from_slice(lengths);
    let mut vm = vec![0.0];
    vm.extend_from_slice(masses);
    WTree::new(parent, el, vm, vec![]).unwrap()
}

/// root(0) - v(1); v - a(2); v - b(3), unit lengths
fn cherry(ma: f64, mb: f64) -> WTree {
    WTree::new(
        vec![None, Some(0), Some(1), Some(1)],
        vec![0.0, 1.0, 1.0, 1.0],
        vec![0.0, 0.0, ma, mb],
        vec![],
    )
    .unwrap()
}

fn random_tree<R: Rng>(rng: &mut R, n: usize) -> WTree {
    let mut parent = vec![None];
    let mut el = vec![0.0];
    let mut vm = vec![0.0];
    for i in 1..n {
        parent.push(Some(rng.random_range(0..i)));
        el.push(rng.random_range(0.1..2.0));
        vm.push(rng.random_range(0.0..1.0));
    }
    WTree::new(parent, el, vm, vec![]).unwrap()
}

/// Path-walk distance, independent of heights and mrca.
fn walk_distance(t: &WTree, u: usize, v: usize) -> f64 {
    let mut up_u = vec![(u, 0.0)];
    let mut x = u;
    let mut acc = 0.0;
    while let Some(p) = t.parent(x) {
        acc += t.edge_len(x);
        up_u.push((p, acc));
        x = p;
    }
    let mut y = v;
    let mut acc_v = 0.0;
    loop {
        if let Some(&(_, du)) = up_u.iter().find(|(w, _)| *w == y) {
            return du + acc_v;
        }
        acc_v += t.edge_len(y);
        y = t.parent(y).unwrap();
    }
}

#[test]
fn build_examples() {
    let t = WTree::singleton();
    assert_eq!((t.total_length(), t.total_mass()), (0.0, 0.0));
    let t = path(&[1.0], &[1.0]);
    assert_eq!((t.total_length(), t.total_mass()), (1.0, 1.0));
    let err = WTree::new(
        vec![Some(1), Some(0)],
        vec![1.0, 1.0],
        vec![0.0, 0.0],
        vec![],
    )
    .unwrap_err();
    assert!(matches!(err, Error::Validation { .. }));
    let err = WTree::new(
        vec![None, Some(2), Some(1)],
        vec![0.0, 1.0, 1.0],
        vec![0.0; 3],
        vec![],
    )
    .unwrap_err();
    assert_eq!(err, Error::validation(1, "cycle in parent links"));
}

#[test]
fn validation_names_offending_index() {
    let e = WTree::new(
        vec![None, Some(0), None],
        vec![0.0, 1.0, 0.0],
        vec![0.0; 3],
        vec![],
    )
    .unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(2), .. }));
    let e = WTree::new(vec![None, Some(0)], vec![0.0, -1.0], vec![0.0; 2], vec![]).unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(1), .. }));
    let e = WTree::new(vec![None, Some(0)], vec![0.0, 1.0], vec![0.0, -0.5], vec![]).unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(1), .. }));
    let e = WTree::new(vec![None, Some(0)], vec![0.0, 0.0], vec![0.0; 2], vec![]).unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(1), .. }));
    let e = WTree::new(vec![None, Some(0)], vec![0.0, 1.0], vec![1.0, 0.0], vec![]).unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(0), .. }));
    let e = WTree::new(vec![None, Some(5)], vec![0.0, 1.0], vec![0.0; 2], vec![]).unwrap_err();
    assert!(matches!(e, Error::Validation { index: Some(1), .. }));
    assert!(WTree::new(vec![None], vec![0.0, 1.0], vec![0.0], vec![]).is_err());
}

#[test]
fn height_examples() {
    let t = path(&[1.0, 2.0], &[0.0, 0.0]);
    assert_eq!(t.height_of(0).unwrap(), 0.0);
    assert_eq!(t.height_of(2).unwrap(), 3.0);
    assert_eq!(cherry(1.0, 1.0).height_of(2).unwrap(), 2.0);
    assert!(t.height_of(3).is_err());
}

#[test]
fn mrca_examples() {
    let t = cherry(1.0, 1.0);
    assert_eq!(t.mrca(2, 2).unwrap(), 2);
    assert_eq!(t.mrca(2, 3).unwrap(), 1);
    assert_eq!(t.mrca(0, 3).unwrap(), 0);
    assert_eq!(t.distance(2, 3).unwrap(), 2.0);
    assert!(t.mrca(0, 9).is_err());
}

#[test]
fn graft_examples() {
    let edge = path(&[1.0], &[1.0]);
    let g = WTree::singleton().graft(&[(edge.clone(), 0)]).unwrap();
    assert_eq!((g.len(), g.total_length(), g.total_mass()), (2, 1.0, 1.0));

    let c = cherry(1.0, 1.0);
    assert_eq!(c.graft(&[]).unwrap(), c);

    let g = c.graft(&[(edge.clone(), 2), (edge.clone(), 3)]).unwrap();
    let (a2, b2) = (4, 5);
    assert_eq!(g.parent(a2), Some(2));
    assert_eq!(g.parent(b2), Some(3));
    assert_eq!(g.distance(a2, b2).unwrap(), 4.0);
    // the four cases of the grafted metric
    assert_eq!(g.distance(2, 3).unwrap(), c.distance(2, 3).unwrap());
    assert_eq!(g.distance(0, a2).unwrap(), c.distance(0, 2).unwrap() + 1.0);
    assert_eq!(g.total_mass(), 4.0);
    assert!(c.graft(&[(edge, 7)]).is_err());
}

#[test]
fn graft_moves_root_mass_to_attach_point() {
    // a base whose non-root vertex receives a subtree root; masses add
    let base = path(&[1.0], &[0.25]);
    let sub = path(&[0.5, 0.5], &[0.5, 0.125]);
    let g = base.graft(&[(sub.clone(), 1)]).unwrap();
    assert_eq!(g.vertex_mass(1), 0.25);
    assert_eq!(g.total_mass(), base.total_mass() + sub.total_mass());
    assert_eq!(g.total_length(), base.total_length() + sub.total_length());
}

#[test]
fn spine_examples() {
    let t = path(&[1.5], &[1.0]);
    let d = t.spine_decomposition(1, false).unwrap();
    assert_eq!((d.height, d.atoms.len()), (1.5, 0));

    let t = cherry(1.0, 1.0);
    let d = t.spine_decomposition(2, true).unwrap();
    assert_eq!(d.height, 2.0);
    assert_eq!(d.atoms.len(), 1);
    assert_eq!(
        (d.atoms[0].height, d.atoms[0].mass, d.atoms[0].attach),
        (1.0, 1.0, 1)
    );
    assert_eq!(d.atoms[0].members.as_deref(), Some(&[3][..]));

    let star = WTree::new(
        vec![None, Some(0), Some(0), Some(0)],
        vec![0.0, 1.0, 1.0, 1.0],
        vec![0.0, 1.0, 2.0, 3.0],
        vec![],
    )
    .unwrap();
    let d = star.spine_decomposition(1, false).unwrap();
    assert_eq!(d.height, 1.0);
    assert_eq!(d.atoms.len(), 1);
    assert_eq!((d.atoms[0].height, d.atoms[0].mass), (0.0, 5.0));

    assert!(matches!(
        t.spine_decomposition(1, false),
        Err(Error::Domain(_))
    ));
}

#[test]
fn graft_then_decompose_recovers_atoms() {
    let base = path(&[0.5, 0.25, 1.0, 0.75], &[0.0, 0.0, 0.0, 0.0]);
    let subs = [
        (path(&[1.0], &[0.5]), 0usize),
        (cherry(0.25, 0.125), 2),
        (path(&[0.5, 0.5], &[0.0, 1.0]), 3),
        (path(&[2.0], &[0.0625]), 3),
    ];
    let g = base.graft(&subs).unwrap();
    let d = g.spine_decomposition(4, false).unwrap();
    assert_eq!(d.height, base.height_of(4).unwrap());
    let got: Vec<(f64, f64)> = d.atoms.iter().map(|a| (a.height, a.mass)).collect();
    assert_eq!(got, vec![(0.0, 0.5), (0.75, 0.375), (1.75, 1.0625)]);
}

#[test]
fn sample_by_mass_examples() {
    let mut rng = stream(1, 0, "test");
    let t = path(&[1.0], &[2.0]);
    for _ in 0..100 {
        assert_eq!(t.sample_vertex_by_mass(&mut rng).unwrap(), 1);
    }
    let t = WTree::new(
        vec![None, Some(0), Some(0)],
        vec![0.0, 1.0, 1.0],
        vec![0.0, 1.0, 3.0],
        vec![],
    )
    .unwrap();
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| t.sample_vertex_by_mass(&mut rng).unwrap() == 2)
        .count();
    let f = hits as f64 / n as f64;
    let se = (0.75f64 * 0.25 / n as f64).sqrt();
    assert!((f - 0.75).abs() <= 3.0 * se, "{f}");
    let z = path(&[1.0], &[0.0]);
    assert!(matches!(
        z.sample_vertex_by_mass(&mut rng),
        Err(Error::Domain(_))
    ));
    let c = cherry(1.0, 1.0);
    for _ in 0..100 {
        assert!(c.is_leaf(c.sample_leaf_by_mass(&mut rng).unwrap()));
    }
}

#[test]
fn metric_axioms_on_random_trees() {
    let mut rng = stream(2, 0, "metric");
    for _ in 0..500 {
        let n = rng.random_range(1..40);
        let t = random_tree(&mut rng, n);
        for _ in 0..100 {
            let (u, v, w) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            let duv = t.distance(u, v).unwrap();
            assert!((duv - walk_distance(&t, u, v)).abs() <= 1e-12);
            assert_eq!(duv, t.distance(v, u).unwrap());
            assert!(duv <= t.distance(u, w).unwrap() + t.distance(w, v).unwrap() + 1e-12);
            assert_eq!(duv.abs() <= 1e-12, u == v);
            let m = t.mrca(u, v).unwrap();
            assert_eq!(
                duv,
                t.height_of(u).unwrap() + t.height_of(v).unwrap() - 2.0 * t.height_of(m).unwrap()
            );
        }
    }
}

#[test]
fn spine_partition_on_random_trees() {
    let mut rng = stream(3, 0, "spine");
    for _ in 0..300 {
        let n = rng.random_range(2..60);
        let t = random_tree(&mut rng, n);
        let leaf = t.sample_leaf_by_mass(&mut rng).unwrap();
        let d = t.spine_decomposition(leaf, true).unwrap();
        let sum: f64 = d.atoms.iter().map(|a| a.mass).sum::<f64>() + t.vertex_mass(leaf);
        assert!((sum - t.total_mass()).abs() <= 1e-12 * t.total_mass().max(1.0));
        assert!(d.atoms.windows(2).all(|w| w[0].height < w[1].height));
        assert!(d
            .atoms
            .iter()
            .all(|a| a.height >= 0.0 && a.height <= d.height));
        // members plus spine vertices cover the tree exactly once
        let mut seen = vec![0u8; n];
        for a in &d.atoms {
            for &m in a.members.as_ref().unwrap() {
                seen[m] += 1;
            }
        }
        let mut v = leaf;
        loop {
            seen[v] += 1;
            match t.parent(v) {
                Some(p) => v = p,
                None => break,
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }
}

proptest! {
    #[test]
    fn graft_conserves_mass_and_length(seed in any::<u64>(), k in 0usize..5) {
        let mut rng = stream(seed, 0, "graft");
        let nb = rng.random_range(1..20);
        let base = random_tree(&mut rng, nb);
        let grafts: Vec<(WTree, usize)> = (0..k)
            .map(|_| {
                let n = rng.random_range(1..10);
                (random_tree(&mut rng, n), rng.random_range(0..base.len()))
            })
            .collect();
        let g = base.graft(&grafts).unwrap();
        let m: f64 = base.total_mass() + grafts.iter().map(|(s, _)| s.total_mass()).sum::<f64>();
        let l: f64 = base.total_length() + grafts.iter().map(|(s, _)| s.total_length()).sum::<f64>();
        prop_assert!((g.total_mass() - m).abs() <= 1e-12 * m.max(1.0));
        prop_assert!((g.total_length() - l).abs() <= 1e-12 * l.max(1.0));
        prop_assert_eq!(g.len(), base.len() + grafts.iter().map(|(s, _)| s.len() - 1).sum::<usize>());
    }

    #[test]
    fn json_round_trip_is_bit_exact(seed in any::<u64>()) {
        let mut rng = stream(seed, 0, "json");
        let n = rng.random_range(1..30);
        let t = random_tree(&mut rng, n);
        let back = WTree::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn json_shape() {
    let t = path(&[1.0], &[0.5]);
    assert_eq!(
        t.to_json(),
        r#"{"parent":[null,0],"edge_len":[0.0,1.0],"vertex_mass":[0.0,0.5],"node_mass":[0.0,0.0],"root":0}"#
    );
    let bad = r#"{"parent":[null,0],"edge_len":[0.0,1.0],"vertex_mass":[0.0,0.5],"node_mass":[0.0,0.0],"root":1}"#;
    assert!(WTree::from_json(bad).is_err());
}
