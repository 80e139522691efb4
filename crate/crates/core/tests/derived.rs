//! Worked values, each checked against an oracle computed here from first
//! principles (integer arithmetic, brute force or exponent bookkeeping)
//! rather than against the library's own code path.

use std::sync::Arc;

use num_bigint::BigInt;
use wittforge::codec;
use wittforge::desk::{self, Intersection, Reducedness};
use wittforge::expr::parse_expr;
use wittforge::ghost;
use wittforge::hensel::{self, HenselProblem};
use wittforge::lab::{self, FontaineElement};
use wittforge::ramified::{self, RamifiedBase, RamifiedWitt, RwEval};
use wittforge::structural::{self, Kind};
use wittforge::{Ring, WittVector};

fn ring(s: &str) -> Arc<Ring> {
    Ring::parse(s).unwrap()
}

fn wv(r: &Arc<Ring>, coords: &[&str]) -> WittVector {
    WittVector::new(r.clone(), coords.iter().map(|c| r.parse_elem(c).unwrap()).collect()).unwrap()
}

/// `w_n(z) = sum_j p^j z_j^(p^(n-j))`, written out independently.
fn ghost_oracle(p: i64, z: &[i64]) -> Vec<i64> {
    (0..z.len())
        .map(|n| {
            (0..=n)
                .map(|j| p.pow(j as u32) * z[j].pow(p.pow((n - j) as u32) as u32))
                .sum()
        })
        .collect()
}

/// Witt coordinates over F_p of the integer `m` mod `p^n`: peel off
/// Teichmüller digits, `[d] = d^(p^(n-1)) mod p^n`.
fn teichmuller_digits(p: i64, n: u32, m: i64) -> Vec<i64> {
    let modulus = p.pow(n);
    let mut rest = m.rem_euclid(modulus);
    let mut out = Vec::new();
    for _ in 0..n {
        let d = rest % p;
        let mut t = 1i64;
        for _ in 0..p.pow(n - 1) {
            t = t * d % modulus;
        }
        out.push(d);
        rest = (rest - t).rem_euclid(modulus) / p;
    }
    out
}

#[test]
fn denominator_bound() {
    let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=1 laurent=true");
    assert_eq!(r.denom(), 2 * 3i64.pow(2));
}

#[test]
fn frobenius_on_f4_is_periodic() {
    let f4 = ring("ff p=2 e=2 modulus=u^2+u+1");
    let u = f4.parse_elem("u").unwrap();
    let square = f4.mul(&u, &u);
    assert_eq!(f4.frobenius(&u, 1).unwrap(), square);
    assert_eq!(f4.frobenius(&u, 2).unwrap(), u);
}

#[test]
fn nilpotent_witness_by_search() {
    let r = ring("uq base=(ff p=2 e=1) var=T modulus=T^2+1");
    let nilpotents: Vec<_> = r
        .elements()
        .unwrap()
        .into_iter()
        .filter(|h| !h.is_zero() && r.mul(h, h).is_zero())
        .collect();
    assert_eq!(nilpotents, vec![r.parse_elem("T + 1").unwrap()]);
    assert_eq!(desk::is_reduced_univariate(&r).unwrap(), Reducedness::Nilpotent(nilpotents[0].clone()));
}

#[test]
fn intersection_member() {
    let r = ring("frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false");
    let e = |s: &str| r.parse_elem(s).unwrap();
    let Intersection::Member(h) = desk::intersection_witness(&r, &e("x"), &e("y"), &e("x^2*y"), 1, &e("x*y^2"), 1).unwrap()
    else {
        panic!("expected membership");
    };
    assert_eq!(r.mul(&h, &e("x")), e("x^2*y"));
    assert_eq!(r.mul(&h, &e("y")), e("x*y^2"));
    assert_eq!(h, e("x*y"));
}

#[test]
fn p2_level1_tables_satisfy_ghost_identities() {
    let (s, _) = structural::generate(2, Kind::Sum, 1, 1000).unwrap();
    let (pr, _) = structural::generate(2, Kind::Product, 1, 1000).unwrap();
    assert_eq!(s.dump(), "S_0 = X_0 + Y_0\nS_1 = -X_0*Y_0 + X_1 + Y_1\n");
    assert_eq!(pr.dump(), "P_0 = X_0*Y_0\nP_1 = X_0^2*Y_1 + Y_0^2*X_1 + 2*X_1*Y_1\n");
    // the hand formulas, checked on an integer grid against w_1
    for x0 in -3..=3i64 {
        for x1 in -3..=3 {
            for y0 in -3..=3 {
                for y1 in -3..=3 {
                    let (wx, wy) = (ghost_oracle(2, &[x0, x1]), ghost_oracle(2, &[y0, y1]));
                    let s = [x0 + y0, x1 + y1 - x0 * y0];
                    let p = [x0 * y0, x0 * x0 * y1 + x1 * y0 * y0 + 2 * x1 * y1];
                    assert_eq!(ghost_oracle(2, &s), vec![wx[0] + wy[0], wx[1] + wy[1]]);
                    assert_eq!(ghost_oracle(2, &p), vec![wx[0] * wy[0], wx[1] * wy[1]]);
                }
            }
        }
    }
}

#[test]
fn negation_level0() {
    for p in [2, 3, 5] {
        let (t, _) = structural::generate(p, Kind::Negation, 0, 1000).unwrap();
        assert_eq!(t.dump(), "I_0 = -X_0\n");
    }
}

#[test]
fn small_witt_sums_against_integers() {
    let f2 = ring("ff p=2 e=1");
    assert_eq!(teichmuller_digits(2, 2, 1 + 1), vec![0, 1]);
    assert_eq!(wv(&f2, &["1", "0"]).add(&wv(&f2, &["1", "0"])).unwrap(), wv(&f2, &["0", "1"]));
    // [1] = 1 and [2] = 8 in Z/9
    let f3 = ring("ff p=3 e=1");
    assert_eq!(teichmuller_digits(3, 2, 1 + 8), vec![0, 0]);
    assert!(wv(&f3, &["1", "0"]).add(&wv(&f3, &["2", "0"])).unwrap().is_zero());
    for m in -20..20 {
        let expect: Vec<String> = teichmuller_digits(3, 3, m).iter().map(|d| d.to_string()).collect();
        let expect: Vec<&str> = expect.iter().map(String::as_str).collect();
        assert_eq!(WittVector::from_int(&f3, 3, m), wv(&f3, &expect));
    }
}

#[test]
fn ghost_round_trip() {
    let g = ghost::ghost(2, &[BigInt::from(1), BigInt::from(1)]);
    let expect: Vec<BigInt> = ghost_oracle(2, &[1, 1]).into_iter().map(BigInt::from).collect();
    assert_eq!(g, expect);
    assert_eq!(g, vec![BigInt::from(1), BigInt::from(3)]);
    assert_eq!(ghost::from_ghost(2, &g).unwrap(), vec![BigInt::from(1), BigInt::from(1)]);
}

#[test]
fn doubling_a_teichmuller_in_characteristic_two() {
    let r = ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false");
    let x = wv(&r, &["x", "0"]);
    let sum = x.add(&x).unwrap();
    assert_eq!(sum, wv(&r, &["0", "x^2"]));
    assert_eq!(sum, x.mul_p());
}

#[test]
fn fv_is_p_fold_sum() {
    let f3 = ring("ff p=3 e=1");
    for m in 0..27 {
        let x = WittVector::from_int(&f3, 3, m);
        let three_x = x.add(&x).unwrap().add(&x).unwrap();
        assert_eq!(x.verschiebung().frobenius_map(), three_x);
        assert_eq!(three_x, WittVector::from_int(&f3, 3, 3 * m));
    }
}

#[test]
fn divide_p_times_teichmuller() {
    let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false");
    let a = r.parse_elem("x + 1").unwrap();
    let t = WittVector::teichmuller(&r, a.clone(), 3);
    let x = t.add(&t).unwrap().add(&t).unwrap();
    assert_eq!(x.divide_by_p().unwrap(), WittVector::teichmuller(&r, a, 2));
}

fn x2_minus_3() -> (Arc<RamifiedBase>, Arc<Ring>) {
    (RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap(), ring("ff p=3 e=1"))
}

#[test]
fn pi_squared_is_three() {
    let (b, r) = x2_minus_3();
    let pi = RamifiedWitt::pi(&b, &r, 6).unwrap();
    let one = RamifiedWitt::one(&b, &r, 6).unwrap();
    let three = one.add(&one).unwrap().add(&one).unwrap();
    assert_eq!(pi.mul(&pi).unwrap(), three);
    let n = three.witt_len();
    assert_eq!(three.coords()[0], WittVector::from_int(&r, n, 3));
    assert_eq!(teichmuller_digits(3, 3, 3), vec![0, 1, 0]);
    assert!(three.coords()[1].is_zero());
}

#[test]
fn dividing_three_by_pi() {
    let (b, r) = x2_minus_3();
    let three = RamifiedWitt::from_int(&b, &r, 6, 3).unwrap();
    assert!(three.reduce_mod_pi().is_zero());
    let once = three.divide_by_pi().unwrap();
    assert_eq!(once, RamifiedWitt::pi(&b, &r, 5).unwrap());
    assert_eq!(once.divide_by_pi().unwrap(), RamifiedWitt::one(&b, &r, 4).unwrap());
    let digits = three.digit_expand(6).unwrap();
    let expect: Vec<_> = [0, 0, 1, 0, 0, 0].iter().map(|&d| r.from_int(d)).collect();
    assert_eq!(digits.digits, expect);
}

#[test]
fn twisted_product_of_a_monomial() {
    let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
    let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=true");
    let ev = RwEval { base: &b, ring: &r, prec: 4, allow_x: false };
    let x = ev.eval_constant(&parse_expr("x").unwrap()).unwrap();
    // exponents q^1 + q^0 + q^-1 = 3 + 1 + 1/3 = 13/3, numerator over 3
    let (num, den) = (3 * 3 + 3 + 1, 3);
    assert_eq!((num, den), (13, 3));
    let expect = ev.eval_constant(&parse_expr("x^(13/3)").unwrap()).unwrap();
    assert_eq!(ramified::twisted_product(&x, 1).unwrap(), expect);

    let a = ev.eval_constant(&parse_expr("x + 1 + pi").unwrap()).unwrap();
    let abar = r.parse_elem("x + 1").unwrap();
    let mut prod = r.one();
    for k in -1..=1 {
        prod = r.mul(&prod, &r.frobenius(&abar, k).unwrap());
    }
    assert_eq!(ramified::twisted_product(&a, 1).unwrap().reduce_mod_pi(), prod);
}

/// Elements `h != 0` of a finite ring with `h^p = 0`.
fn frobenius_kernel(r: &Ring) -> Vec<wittforge::Elem> {
    r.elements()
        .unwrap()
        .into_iter()
        .filter(|h| !h.is_zero() && r.pow(h, r.p()).is_zero())
        .collect()
}

#[test]
fn truncated_polynomial_kernel_generators() {
    for (p, m) in [(2u64, 2u32), (3, 1), (3, 2)] {
        let size = p.pow(m);
        let r = ring(&format!("uq base=(ff p={p} e=1) var=T modulus=T^{size}"));
        let kernel = frobenius_kernel(&r);
        // every kernel element is divisible by T^(p^(m-1)), and that power is in the kernel
        let gen_exp = p.pow(m - 1);
        let lowest = kernel
            .iter()
            .map(|h| h.terms().map(|(k, _)| k[0]).min().unwrap())
            .min()
            .unwrap();
        assert_eq!(lowest as u64, gen_exp);
        let rep = lab::perfection_report(&r, 3, 7);
        assert_eq!(rep.kernel_generators, vec![r.pow(&r.var(0), gen_exp)]);
        assert!(rep.verified);
    }
}

#[test]
fn tower_model_three_one() {
    let r = lab::tower_model(3, 1).unwrap();
    let all = r.elements().unwrap();
    assert_eq!(all.len(), 27);
    let u = r.var(0);
    let kernel = frobenius_kernel(&r);
    let multiples_of_u: Vec<_> = all
        .iter()
        .filter(|h| !h.is_zero() && h.terms().all(|(k, _)| k[0] >= 1))
        .cloned()
        .collect();
    assert_eq!(kernel, multiples_of_u);
    assert!(kernel.contains(&u));
    assert!(lab::semiperfect_tower_check(3, 1).unwrap().passed());
    assert!(lab::semiperfect_tower_check(2, 2).unwrap().passed());
}

#[test]
fn root_sequences_are_compatible() {
    for (p, m) in [(2u64, 3u32), (3, 2), (5, 1)] {
        let r = lab::tower_model(p, m).unwrap();
        let u = r.var(0);
        let seq: Vec<_> = (0..m).map(|i| r.pow(&u, p.pow(m - 1 - i))).collect();
        for w in seq.windows(2) {
            assert_eq!(r.pow(&w[1], p), w[0]);
        }
        let fe = FontaineElement::new(&r, seq).unwrap();
        assert_eq!(codec::parse_fontaine(&r, &codec::format_fontaine(&fe)).unwrap(), fe);
    }
}

#[test]
fn square_root_of_p_plus_x() {
    let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
    let r = ring("frac base=(ff p=3 e=1) vars=x depth_p=6 depth_2=1 laurent=true");
    let n = 8;
    let ev = RwEval { base: &b, ring: &r, prec: n, allow_x: true };
    let coeffs = ev.eval(&parse_expr("X^2 - (p + x)").unwrap()).unwrap();
    let seed = r.parse_elem("x^(1/2)").unwrap();
    // digit 0 solves a^2 = x mod pi
    assert_eq!(r.mul(&seed, &seed), r.parse_elem("x").unwrap());
    let initial = RamifiedWitt::teichmuller(&b, &r, n, seed.clone()).unwrap();
    let res = hensel::hensel_lift(&HenselProblem { coeffs, initial, prec: n }).unwrap();
    let s = res.root;
    let target = ev.eval_constant(&parse_expr("p + x").unwrap()).unwrap();
    assert!(s.mul(&s).unwrap().eq_mod(&target, n).unwrap());
    assert_eq!(s.digit_expand(n).unwrap().digits[0], seed);
}
