use super::components::ComponentMap;

const PALETTE: [[u8; 3]; 8] = [
    [230, 159, 0],
    [86, 180, 233],
    [0, 158, 115],
    [240, 228, 66],
    [0, 114, 178],
    [213, 94, 0],
    [204, 121, 167],
    [153, 153, 153],
];

/// Binary PPM (P6) image of a component map: one pixel per cell, x1 to the
/// right, x2 upward (first image row is the highest x2), amoeba black.
pub fn component_ppm(map: &ComponentMap) -> Vec<u8> {
    let (n1, n2) = map.grid.n2();
    let mut out = format!("P6\n{n1} {n2}\n255\n").into_bytes();
    out.reserve(3 * n1 * n2);
    for row in 0..n2 {
        let j = n2 - 1 - row;
        for i in 0..n1 {
            let l = map.label_at(i, j);
            let px = if l == 0 { [0, 0, 0] } else { PALETTE[(l as usize - 1) % PALETTE.len()] };
            out.extend_from_slice(&px);
        }
    }
    out
}
