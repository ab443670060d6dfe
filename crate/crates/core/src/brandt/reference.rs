//! Published Brandt matrices for the quaternion algebra of discriminant 5,
//! in the order they were printed.

/// `B_g(l)` for `p = 5`, when known.
pub fn h5_brandt(g: usize, ell: u64) -> Option<Vec<Vec<i64>>> {
    let m: Vec<Vec<i64>> = match (g, ell) {
        (1, 2) => vec![vec![3]],
        (1, 3) => vec![vec![4]],
        (1, 7) => vec![vec![8]],
        (1, 11) => vec![vec![12]],
        (2, 2) => vec![vec![12, 3], vec![10, 5]],
        (2, 3) => vec![vec![34, 6], vec![20, 20]],
        (2, 7) => vec![vec![322, 78], vec![260, 140]],
        (2, 11) => vec![vec![1164, 300], vec![1000, 464]],
        (3, 2) => vec![vec![54, 27, 54], vec![30, 15, 90], vec![14, 21, 100]],
        (3, 3) => vec![vec![292, 180, 648], vec![200, 200, 720], vec![168, 168, 784]],
        _ => return None,
    };
    Some(m)
}

/// Class numbers `h_g` for `p = 5`, when known.
pub fn h5_class_number(g: usize) -> Option<usize> {
    [1, 2, 3].get(g.checked_sub(1)?).copied()
}

/// Every `(g, l)` with a published matrix.
pub fn h5_levels() -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for g in 1..=3 {
        for ell in [2, 3, 7, 11] {
            if h5_brandt(g, ell).is_some() {
                out.push((g, ell));
            }
        }
    }
    out
}
