use crate::error::{Error, Result};
use crate::grid::{same_resolution, DyadicCube, GridFunction, Pyramid};

use super::SparseCollection;

/// `Σ_S Σ_{Q∈S} |Q|⟨f⟩_Q⟨g⟩_Q` with absolute-value averages.
pub fn bilinear_form(collections: &[SparseCollection], f: &GridFunction, g: &GridFunction) -> Result<f64> {
    same_resolution(f.resolution(), g.resolution())?;
    let pf = Pyramid::of_abs(f);
    let pg = Pyramid::of_abs(g);
    let mut total = 0.0;
    for s in collections {
        same_resolution(s.resolution(), f.resolution())?;
        total += s
            .cubes()
            .iter()
            .map(|q| q.measure() * pf.average(q) * pg.average(q))
            .sum::<f64>();
    }
    Ok(total)
}

/// `A_S f = Σ_{Q∈S} ⟨f⟩_Q 1_Q`.
pub fn sparse_operator(s: &SparseCollection, f: &GridFunction) -> Result<GridFunction> {
    same_resolution(s.resolution(), f.resolution())?;
    let n = f.resolution();
    let pf = Pyramid::of_abs(f);
    let mut out = vec![0.0f64; f.len()];
    for q in s.cubes() {
        let avg = pf.average(q);
        for x in &mut out[q.cells(n)?] {
            *x += avg;
        }
    }
    GridFunction::new(n, out)
}

/// Stopping cubes of `f` below `top` with ratio `a > 2`.
///
/// Starting from `top`, each selected `P` selects the maximal `Q ⊊ P` with
/// `⟨f⟩_Q > a⟨f⟩_P`, down to single cells.
pub fn cz_stopping_collection(f: &GridFunction, top: &DyadicCube, a: f64) -> Result<SparseCollection> {
    joint_stopping_collection(&[f], top, a)
}

/// Stopping cubes for several functions at once.
///
/// `Q ⊊ P` is selected when it is maximal with `⟨f_i⟩_Q > a⟨f_i⟩_P` for some `i`.
/// Functions with `⟨f_i⟩_top = 0` never trigger a stop.
pub fn joint_stopping_collection(fs: &[&GridFunction], top: &DyadicCube, a: f64) -> Result<SparseCollection> {
    if !(a > 2.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("stopping ratio must be a finite number > 2, got {a}")));
    }
    let Some(first) = fs.first() else {
        return Err(Error::InvalidArgument("no functions to stop on".into()));
    };
    let n = first.resolution();
    for f in fs {
        same_resolution(n, f.resolution())?;
    }
    top.check_resolution(n)?;
    let pyramids: Vec<Pyramid> = fs.iter().map(|f| Pyramid::of_abs(f)).collect();
    if pyramids.iter().all(|p| p.average(top) == 0.0) {
        return Err(Error::InvalidArgument(format!("every function vanishes on {top}")));
    }

    let mut selected = vec![*top];
    // (candidate, thresholds inherited from its selected ancestor)
    let mut stack: Vec<(DyadicCube, Vec<f64>)> = Vec::new();
    let push_children = |stack: &mut Vec<(DyadicCube, Vec<f64>)>, p: &DyadicCube, limits: Vec<f64>| {
        if p.level() < n {
            let [l, r] = p.children();
            stack.push((r, limits.clone()));
            stack.push((l, limits));
        }
    };
    let limits_of = |p: &DyadicCube| -> Vec<f64> {
        pyramids
            .iter()
            .map(|pyr| {
                let avg = pyr.average(p);
                if avg == 0.0 { f64::INFINITY } else { a * avg }
            })
            .collect()
    };
    push_children(&mut stack, top, limits_of(top));
    while let Some((q, limits)) = stack.pop() {
        let stops = pyramids.iter().zip(&limits).any(|(pyr, &lim)| pyr.average(&q) > lim);
        if stops {
            selected.push(q);
            push_children(&mut stack, &q, limits_of(&q));
        } else {
            push_children(&mut stack, &q, limits);
        }
    }
    SparseCollection::new(n, selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, CellSet};
    use crate::sparse::build_disjoint_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube(l: u32, i: u64) -> DyadicCube {
        DyadicCube::new(l, i).unwrap()
    }

    fn gf(n: u32, v: &[f64]) -> GridFunction {
        GridFunction::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn bilinear_examples() {
        let root = SparseCollection::new(3, [DyadicCube::ROOT]).unwrap();
        let one = GridFunction::constant(3, 1.0).unwrap();
        assert_eq!(bilinear_form(std::slice::from_ref(&root), &one, &one).unwrap(), 1.0);
        let f = gf(3, &[1.0, 5.0, 0.0, 2.0, 3.0, 1.0, 0.5, 4.0]);
        let single = bilinear_form(std::slice::from_ref(&root), &f, &one).unwrap();
        assert_eq!(bilinear_form(&[root.clone(), root], &f, &one).unwrap(), 2.0 * single);

        let s = SparseCollection::new(1, [DyadicCube::ROOT, cube(1, 0)]).unwrap();
        let v = bilinear_form(&[s], &gf(1, &[1.0, 0.0]), &gf(1, &[0.0, 1.0])).unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn operator_examples() {
        let root = SparseCollection::new(2, [DyadicCube::ROOT]).unwrap();
        let f = gf(2, &[1.0, -3.0, 0.0, 4.0]);
        assert_eq!(sparse_operator(&root, &f).unwrap().values(), &[2.0; 4]);
        let s = SparseCollection::new(2, [DyadicCube::ROOT, cube(1, 0)]).unwrap();
        let one = GridFunction::constant(2, 1.0).unwrap();
        assert_eq!(sparse_operator(&s, &one).unwrap().values(), &[2.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn operator_pairing_matches_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = 6;
            let f = GridFunction::from_fn(n, |_| rng.gen_range(-1.0..1.0)).unwrap();
            let g = GridFunction::from_fn(n, |_| rng.gen_range(0.0..1.0)).unwrap();
            let s = cz_stopping_collection(&f, &DyadicCube::ROOT, 2.5).unwrap();
            let pairing = inner_product(&sparse_operator(&s, &f).unwrap(), &g).unwrap();
            let form = bilinear_form(&[s], &f, &g).unwrap();
            assert!((pairing - form).abs() <= 1e-12 * form.max(1e-300));
        }
    }

    /// Exhaustive oracle: scan every strict subcube and keep the maximal stoppers.
    fn oracle(f: &GridFunction, a: f64) -> Vec<DyadicCube> {
        let n = f.resolution();
        let avg = |q: &DyadicCube| crate::grid::average(f, q).unwrap();
        let mut out = vec![DyadicCube::ROOT];
        let mut frontier = vec![DyadicCube::ROOT];
        while let Some(p) = frontier.pop() {
            if p.level() == n {
                continue;
            }
            let lim = a * avg(&p);
            let cands: Vec<DyadicCube> = crate::grid::enumerate_cubes(n, p.level() + 1..=n)
                .unwrap()
                .into_iter()
                .filter(|q| p.contains(q) && avg(q) > lim)
                .collect();
            for q in &cands {
                if !cands.iter().any(|o| o.strictly_contains(q)) {
                    out.push(*q);
                    frontier.push(*q);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn stopping_examples() {
        let one = GridFunction::constant(4, 1.0).unwrap();
        let s = cz_stopping_collection(&one, &DyadicCube::ROOT, 3.0).unwrap();
        assert_eq!(s.cubes(), &[DyadicCube::ROOT]);

        let f = GridFunction::indicator(&CellSet::from_cells(3, [0]).unwrap());
        let s = cz_stopping_collection(&f, &DyadicCube::ROOT, 3.0).unwrap();
        assert_eq!(s.cubes(), &[DyadicCube::ROOT, cube(2, 0)]);
        assert_eq!(s.cubes(), oracle(&f, 3.0).as_slice());
    }

    #[test]
    fn stopping_matches_oracle_and_is_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 1 + trial % 6;
            let f = GridFunction::from_fn(n, |_| {
                if rng.gen_bool(0.3) { rng.gen_range(0.0..50.0) } else { rng.gen_range(0.0..1.0) }
            })
            .unwrap();
            if f.is_identically_zero() {
                continue;
            }
            let a = [2.5, 3.0, 4.0, 8.0][trial as usize % 4];
            let s = cz_stopping_collection(&f, &DyadicCube::ROOT, a).unwrap();
            assert_eq!(s.cubes(), oracle(&f, a).as_slice());
            assert!(build_disjoint_eq(&s).is_ok());
        }
    }

    #[test]
    fn stopping_rejects_bad_input() {
        let zero = GridFunction::zeros(3).unwrap();
        assert!(cz_stopping_collection(&zero, &DyadicCube::ROOT, 3.0).is_err());
        let one = GridFunction::constant(3, 1.0).unwrap();
        assert!(cz_stopping_collection(&one, &DyadicCube::ROOT, 2.0).is_err());
        assert!(cz_stopping_collection(&one, &cube(4, 0), 3.0).is_err());
    }
}
