use num_complex::Complex64;

/// Reorders the axes of a row-major tensor. Output axis `k` is input axis
/// `perm[k]`, so the output shape is `dims[perm[0]], dims[perm[1]], ...`.
pub fn permute_axes(data: &[Complex64], dims: &[usize], perm: &[usize]) -> Vec<Complex64> {
    let rank = dims.len();
    assert_eq!(perm.len(), rank, "permutation rank mismatch");
    assert_eq!(data.len(), dims.iter().product::<usize>(), "tensor size mismatch");

    let mut in_strides = vec![1usize; rank];
    for k in (0..rank.saturating_sub(1)).rev() {
        in_strides[k] = in_strides[k + 1] * dims[k + 1];
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // stride in the input for each output axis
    let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();

    let mut out = Vec::with_capacity(data.len());
    if data.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; rank];
    let mut offset = 0usize;
    let last = rank - 1;
    loop {
        // innermost axis as a tight loop
        let (s, d) = (strides[last], out_dims[last]);
        for t in 0..d {
            out.push(data[offset + t * s]);
        }
        let mut k = last;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            offset += strides[k];
            if idx[k] < out_dims[k] {
                break;
            }
            offset -= strides[k] * out_dims[k];
            idx[k] = 0;
        }
    }
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}
