use kron_defect::bounds::{closed_form_lower_bound, expanded_lower_bound, subspace_dim_bound};
use kron_defect::engine::{compute, verify_direct_sum};
use kron_defect::haar::{haar_factors, haar_unitary};
use kron_defect::matrix::fourier;
use kron_defect::{ComplexMatrix, EngineOptions, FactorList, Method, SizeSequence};

const SHAPES: [&[usize]; 6] = [&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2], &[2, 2, 3], &[3, 4]];

fn both(factors: &FactorList) -> (usize, usize) {
    let opts = EngineOptions::default();
    let d = compute(factors, Method::Direct, &opts).unwrap();
    let k = compute(factors, Method::Decomposed, &opts).unwrap();
    (d.dim_mspace, k.dim_mspace)
}

#[test]
fn decomposed_matches_direct_on_haar_products() {
    for shape in SHAPES {
        for seed in 0..10 {
            let (d, k) = both(&haar_factors(shape, seed).unwrap());
            assert_eq!(d, k, "{shape:?} seed {seed}");
        }
    }
}

#[test]
fn decomposed_matches_direct_on_structured_products() {
    let cases = vec![
        vec![fourier(2), fourier(3)],
        vec![fourier(2), fourier(2), fourier(2)],
        vec![ComplexMatrix::identity(2), fourier(3)],
        vec![fourier(4), haar_unitary(2, 5)],
        vec![ComplexMatrix::identity(1), fourier(3), haar_unitary(2, 8)],
        vec![fourier(3), ComplexMatrix::identity(1), fourier(2)],
        vec![haar_unitary(2, 1), haar_unitary(2, 1)],
    ];
    for fs in cases {
        let factors = FactorList::new(fs).unwrap();
        let (d, k) = both(&factors);
        assert_eq!(d, k, "{:?}", factors.sizes());
    }
}

#[test]
fn pattern_subspaces_form_a_direct_sum() {
    for shape in SHAPES {
        for seed in 0..3 {
            let check = verify_direct_sum(
                &haar_factors(shape, seed).unwrap(),
                &EngineOptions::default(),
            )
            .unwrap();
            assert!(
                check.holds,
                "{shape:?} seed {seed}: {} vs {}",
                check.total_rank, check.sum_of_ranks
            );
        }
    }
}

#[test]
fn structured_products_respect_the_lower_bound() {
    for fs in [
        vec![fourier(2), fourier(2)],
        vec![fourier(2), fourier(2), fourier(2)],
        vec![fourier(3), fourier(3)],
        vec![fourier(2), fourier(4)],
    ] {
        let factors = FactorList::new(fs).unwrap();
        let r = compute(&factors, Method::Decomposed, &EngineOptions::default()).unwrap();
        assert!(r.generalized_defect >= r.lower_bound);
    }
}

/// `N^2 - sum_S (prod_{k in S} n_k) * bound(retained)`, by bitmask.
fn expanded_by_hand(sizes: &[usize]) -> i128 {
    let r = sizes.len();
    let n: i128 = sizes.iter().map(|&x| x as i128).product();
    let mut total = n * n;
    for mask in 0u32..(1 << r) - 1 {
        let mult: i128 = (0..r)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| sizes[b] as i128)
            .product();
        let retained: Vec<usize> = (0..r)
            .filter(|b| mask >> b & 1 == 0)
            .map(|b| sizes[b])
            .collect();
        total -= mult * subspace_dim_bound(&retained).unwrap() as i128;
    }
    total
}

#[test]
fn expanded_and_closed_forms_agree_exhaustively() {
    fn rec(prefix: &mut Vec<usize>, depth: usize) {
        if !prefix.is_empty() {
            let s = SizeSequence::new(prefix.clone()).unwrap();
            let closed = closed_form_lower_bound(&s).unwrap() as i128;
            assert_eq!(
                expanded_lower_bound(&s).unwrap().expanded_total,
                closed,
                "{prefix:?}"
            );
            assert_eq!(expanded_by_hand(prefix), closed, "{prefix:?}");
        }
        if depth == 0 {
            return;
        }
        for n in 1..=6 {
            prefix.push(n);
            rec(prefix, depth - 1);
            prefix.pop();
        }
    }
    rec(&mut Vec::new(), 4);
}
