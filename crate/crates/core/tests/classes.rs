use superspecial::hermitian::class_set;

#[test]
fn class_numbers_for_p5() {
    for (g, h, e) in [(1usize, 1usize, vec![6u64]), (2, 2, vec![72, 240]), (3, 3, vec![336, 1296, 1440])] {
        let cs = class_set(5, g, 2).unwrap();
        assert_eq!(cs.h(), h);
        assert_eq!(cs.aut_counts(), e);
    }
}
