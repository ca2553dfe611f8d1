use super::{has_full_multilinear_rank, TuckerDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{svd, DenseTensor};

/// Sequentially truncated HOSVD, processing modes in increasing order.
///
/// For each mode the leading `ranks[j]` left singular vectors of the current
/// partial core's flattening become `U_j`, and the core is contracted with `U_jᵀ`.
pub fn st_hosvd(x: &DenseTensor, ranks: &[usize]) -> Result<TuckerDecomposition> {
    if ranks.len() != x.ndim() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks for a tensor of order {}",
            ranks.len(),
            x.ndim()
        )));
    }
    if let Some((j, _)) = ranks
        .iter()
        .zip(x.dims())
        .enumerate()
        .find(|(_, (&k, &n))| k == 0 || k > n)
    {
        return Err(Error::InvalidRank(format!(
            "rank {} for mode {j} of size {}",
            ranks[j],
            x.dims()[j]
        )));
    }
    let mut core = x.clone();
    let mut factors = Vec::with_capacity(ranks.len());
    for (mode, &k) in ranks.iter().enumerate() {
        let dec = svd(&core.unfold(mode)?)?;
        if dec.left.ncols() < k {
            return Err(Error::DegenerateTruncation(format!(
                "mode {mode} flattening has only {} singular vectors, need {k}",
                dec.left.ncols()
            )));
        }
        let u = dec.left.columns(0, k).into_owned();
        core = core.mode_product(mode, &u.transpose())?;
        factors.push(u);
    }
    if !has_full_multilinear_rank(&core)? {
        return Err(Error::DegenerateTruncation(
            "truncated core is rank-deficient".into(),
        ));
    }
    TuckerDecomposition::new(factors, core)
}
