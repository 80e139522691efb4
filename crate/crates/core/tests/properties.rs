use std::sync::Arc;

use proptest::prelude::*;
use wittforge::codec;
use wittforge::ramified::{DigitExpansion, RamifiedBase, RamifiedWitt};
use wittforge::structural::{Kind, StoreConfig, TableStore};
use wittforge::{Ring, WittVector};

fn f(p: u64) -> Arc<Ring> {
    Ring::parse(&format!("ff p={p} e=1")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// W_n(F_p) is Z/p^n with integers mapped through from_int.
    #[test]
    fn integers_are_a_ring_map(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1usize..5, a in -500i64..500, b in -500i64..500) {
        let r = f(p);
        let (x, y) = (WittVector::from_int(&r, n, a), WittVector::from_int(&r, n, b));
        prop_assert_eq!(x.add(&y).unwrap(), WittVector::from_int(&r, n, a + b));
        prop_assert_eq!(x.mul(&y).unwrap(), WittVector::from_int(&r, n, a * b));
        prop_assert_eq!(x.neg().unwrap(), WittVector::from_int(&r, n, -a));
    }

    #[test]
    fn witt_literals_round_trip(coords in prop::collection::vec(("[0-2]", -3i64..4), 1..5)) {
        let r = Ring::parse("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=true").unwrap();
        let elems = coords
            .iter()
            .map(|(c, e)| r.parse_elem(&format!("{c}*x^({e}/3) + x")).unwrap())
            .collect();
        let w = WittVector::new(r.clone(), elems).unwrap();
        prop_assert_eq!(codec::parse_witt(&r, &codec::format_witt(&w)).unwrap(), w);
    }

    /// assemble(digits) re-expands to the same digits.
    #[test]
    fn digits_round_trip(ds in prop::collection::vec(0i64..3, 1..9)) {
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = f(3);
        let d = DigitExpansion { ring: r.clone(), digits: ds.iter().map(|&v| r.from_int(v)).collect() };
        let x = RamifiedWitt::assemble(&b, &d).unwrap();
        prop_assert_eq!(x.digit_expand(ds.len()).unwrap(), d);
    }

    #[test]
    fn units_invert(m in 1i64..80, prec in 1usize..8) {
        prop_assume!(m % 3 != 0);
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let r = f(3);
        let x = RamifiedWitt::from_int(&b, &r, prec, m).unwrap().add(&RamifiedWitt::pi(&b, &r, prec).unwrap()).unwrap();
        let y = x.inv().unwrap();
        prop_assert_eq!(x.mul(&y).unwrap(), RamifiedWitt::one(&b, &r, prec).unwrap());
    }
}

#[test]
fn cached_tables_survive_and_bad_files_regenerate() {
    let dir = tempfile::tempdir().unwrap();
    let config = StoreConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..StoreConfig::default()
    };
    let first = TableStore::new(config.clone()).get(3, Kind::Sum, 2).unwrap();
    let path = dir.path().join("sum-p3-L2.txt");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first.dump());

    let second = TableStore::new(config.clone()).get(3, Kind::Sum, 2).unwrap();
    assert_eq!(second.dump(), first.dump());

    // a corrupted table fails its spot check and is regenerated
    std::fs::write(&path, first.dump().replace("S_1 = ", "S_1 = 2*X_0 + ")).unwrap();
    let third = TableStore::new(config).get(3, Kind::Sum, 2).unwrap();
    assert_eq!(third.dump(), first.dump());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first.dump());
}
