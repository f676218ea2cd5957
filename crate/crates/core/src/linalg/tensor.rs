use super::{CMat, C64, ZERO};
use crate::error::{dim, invalid, Result};

/// Row-major complex tensor with uniquely labelled axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    labels: Vec<String>,
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl DenseTensor {
    pub fn new<S: Into<String>>(labels: Vec<S>, shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != shape.len() {
            return Err(dim(format!("{} labels for {} axes", labels.len(), shape.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(invalid(format!("duplicate axis label {l:?}")));
            }
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(dim(format!("shape {shape:?} needs {n} entries, got {}", data.len())));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("non-finite tensor entry"));
        }
        Ok(DenseTensor { labels, shape, data })
    }

    pub fn zeros<S: Into<String>>(labels: Vec<S>, shape: Vec<usize>) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(labels, shape, vec![ZERO; n])
    }

    pub fn scalar(z: C64) -> Self {
        DenseTensor { labels: vec![], shape: vec![], data: vec![z] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn axis(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn extent(&self, label: &str) -> Option<usize> {
        self.axis(label).map(|a| self.shape[a])
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let st = strides(&self.shape);
        idx.iter().zip(&st).map(|(i, s)| i * s).sum()
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], z: C64) {
        let o = self.offset(idx);
        self.data[o] = z;
    }

    pub fn conj(&self) -> Self {
        DenseTensor {
            labels: self.labels.clone(),
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        DenseTensor {
            labels: self.labels.clone(),
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<Self> {
        let a = self.axis(from).ok_or_else(|| invalid(format!("no axis {from:?}")))?;
        if from != to && self.axis(to).is_some() {
            return Err(invalid(format!("duplicate axis label {to:?}")));
        }
        self.labels[a] = to.to_string();
        Ok(self)
    }

    pub fn relabel_all<S: Into<String>>(mut self, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.shape.len() {
            return Err(dim("relabel_all: wrong label count"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(invalid(format!("duplicate axis label {l:?}")));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Reorder axes to the given label order.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(dim(format!("permute: {} labels for rank {}", order.len(), self.rank())));
        }
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let a = self.axis(l).ok_or_else(|| invalid(format!("no axis {l:?}")))?;
            if perm.contains(&a) {
                return Err(invalid(format!("duplicate axis label {l:?}")));
            }
            perm.push(a);
        }
        Ok(self.permute_axes(&perm))
    }

    fn permute_axes(&self, perm: &[usize]) -> Self {
        let new_shape: Vec<usize> = perm.iter().map(|&a| self.shape[a]).collect();
        let new_labels: Vec<String> = perm.iter().map(|&a| self.labels[a].clone()).collect();
        if perm.iter().enumerate().all(|(i, &a)| i == a) {
            return DenseTensor { labels: new_labels, shape: new_shape, data: self.data.clone() };
        }
        let old_st = strides(&self.shape);
        let src_st: Vec<usize> = perm.iter().map(|&a| old_st[a]).collect();
        let n = self.data.len();
        let mut data = Vec::with_capacity(n);
        let r = new_shape.len();
        let mut idx = vec![0usize; r];
        let mut off = 0usize;
        for _ in 0..n {
            data.push(self.data[off]);
            let mut k = r;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                off += src_st[k];
                if idx[k] < new_shape[k] {
                    break;
                }
                off -= src_st[k] * new_shape[k];
                idx[k] = 0;
            }
        }
        DenseTensor { labels: new_labels, shape: new_shape, data }
    }

    /// View as a matrix with the given row and column axes (each in order).
    pub fn to_matrix(&self, rows: &[&str], cols: &[&str]) -> Result<CMat> {
        let order: Vec<&str> = rows.iter().chain(cols.iter()).copied().collect();
        let t = self.permute(&order)?;
        let r: usize = rows.iter().map(|l| self.extent(l).unwrap_or(1)).product();
        let c: usize = cols.iter().map(|l| self.extent(l).unwrap_or(1)).product();
        Ok(CMat::from_row_slice(r, c, &t.data))
    }

    pub fn from_matrix<S: Into<String>>(m: &CMat, labels: Vec<S>, shape: Vec<usize>) -> Result<Self> {
        Self::new(labels, shape, super::vec_rm(m))
    }

    /// Merge the listed axes (in that order) into one axis called `into`,
    /// placed where the first of them was.
    pub fn fuse(&self, axes: &[&str], into: &str) -> Result<Self> {
        let first = self.axis(axes[0]).ok_or_else(|| invalid(format!("no axis {:?}", axes[0])))?;
        let mut order: Vec<&str> = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if i == first {
                order.extend_from_slice(axes);
            } else if !axes.contains(&l.as_str()) {
                order.push(l);
            }
        }
        let pos = order.iter().position(|l| *l == axes[0]).unwrap_or(0);
        let t = self.permute(&order)?;
        let mut labels = Vec::new();
        let mut shape = Vec::new();
        let mut k = 0;
        while k < t.labels.len() {
            if k == pos {
                labels.push(into.to_string());
                shape.push(axes.iter().map(|l| self.extent(l).unwrap()).product());
                k += axes.len();
            } else {
                labels.push(t.labels[k].clone());
                shape.push(t.shape[k]);
                k += 1;
            }
        }
        Self::new(labels, shape, t.data)
    }

    /// Split axis `axis` into several axes with the given labels and extents.
    pub fn split(&self, axis: &str, parts: &[(&str, usize)]) -> Result<Self> {
        let a = self.axis(axis).ok_or_else(|| invalid(format!("no axis {axis:?}")))?;
        let prod: usize = parts.iter().map(|p| p.1).product();
        if prod != self.shape[a] {
            return Err(dim(format!("split of {axis:?}: {prod} != {}", self.shape[a])));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut shape = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if i == a {
                for (pl, pe) in parts {
                    labels.push(pl.to_string());
                    shape.push(*pe);
                }
            } else {
                labels.push(l.clone());
                shape.push(self.shape[i]);
            }
        }
        Self::new(labels, shape, self.data.clone())
    }

    /// Elementwise sum with a tensor whose axes are a permutation of ours.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let order: Vec<&str> = self.labels.iter().map(|s| s.as_str()).collect();
        let o = other.permute(&order)?;
        if o.shape != self.shape {
            return Err(dim("add: shape mismatch"));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(DenseTensor { labels: self.labels.clone(), shape: self.shape.clone(), data })
    }
}

/// Contract `a` and `b` over the listed (label in a, label in b) pairs.
///
/// The result carries the unpaired axes of `a` followed by those of `b`.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(&str, &str)]) -> Result<DenseTensor> {
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for (la, lb) in pairs {
        let ia = a.axis(la).ok_or_else(|| invalid(format!("no axis {la:?} in left tensor")))?;
        let ib = b.axis(lb).ok_or_else(|| invalid(format!("no axis {lb:?} in right tensor")))?;
        if a.shape[ia] != b.shape[ib] {
            return Err(dim(format!(
                "extent mismatch on ({la}, {lb}): {} vs {}",
                a.shape[ia], b.shape[ib]
            )));
        }
        if pa.contains(&ia) || pb.contains(&ib) {
            return Err(invalid(format!("axis paired twice: ({la}, {lb})")));
        }
        pa.push(ia);
        pb.push(ib);
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|i| !pa.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|i| !pb.contains(i)).collect();
    let mut labels: Vec<String> = free_a.iter().map(|&i| a.labels[i].clone()).collect();
    for &i in &free_b {
        let l = &b.labels[i];
        if labels.contains(l) {
            return Err(invalid(format!("duplicate axis label {l:?} in result")));
        }
        labels.push(l.clone());
    }
    let shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let k: usize = pa.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape[i]).product();
    let perm_a: Vec<usize> = free_a.iter().chain(pa.iter()).copied().collect();
    let perm_b: Vec<usize> = pb.iter().chain(free_b.iter()).copied().collect();
    let ta = a.permute_axes(&perm_a);
    let tb = b.permute_axes(&perm_b);
    let data = matmul_rm(&ta.data, &tb.data, m, k, n);
    Ok(DenseTensor { labels, shape, data })
}

/// Row-major (m×k)·(k×n) product.
fn matmul_rm(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    if m == 0 || n == 0 {
        return vec![];
    }
    if k == 0 {
        return vec![ZERO; m * n];
    }
    // nalgebra is column-major: row-major A (m×k) is column-major Aᵀ (k×m).
    let at = nalgebra::DMatrix::from_column_slice(k, m, a);
    let bt = nalgebra::DMatrix::from_column_slice(n, k, b);
    // (A·B)ᵀ = Bᵀ·Aᵀ, stored column-major, is A·B in row-major order.
    let ct = bt * at;
    ct.as_slice().to_vec()
}

impl DenseTensor {
    pub fn contract(&self, other: &DenseTensor, pairs: &[(&str, &str)]) -> Result<DenseTensor> {
        contract(self, other, pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn identity_times_vector() {
        let id = DenseTensor::new(vec!["i", "j"], vec![2, 2], vec![c64(1., 0.), ZERO, ZERO, c64(1., 0.)]).unwrap();
        let v = DenseTensor::new(vec!["k"], vec![2], vec![c64(1., 0.), c64(2., 0.)]).unwrap();
        let r = contract(&id, &v, &[("j", "k")]).unwrap();
        assert_eq!(r.labels(), &["i".to_string()]);
        assert_eq!(r.data(), &[c64(1., 0.), c64(2., 0.)]);
    }

    #[test]
    fn extent_mismatch_is_error() {
        let a = DenseTensor::zeros(vec!["i"], vec![2]).unwrap();
        let b = DenseTensor::zeros(vec!["j"], vec![3]).unwrap();
        assert!(contract(&a, &b, &[("i", "j")]).is_err());
    }

    #[test]
    fn duplicate_result_label_is_error() {
        let a = DenseTensor::zeros(vec!["i", "x"], vec![2, 2]).unwrap();
        let b = DenseTensor::zeros(vec!["j", "x"], vec![2, 2]).unwrap();
        assert!(contract(&a, &b, &[("i", "j")]).is_err());
    }

    #[test]
    fn fuse_then_split_round_trips() {
        let data: Vec<C64> = (0..24).map(|k| c64(k as f64, 0.0)).collect();
        let t = DenseTensor::new(vec!["a", "b", "c"], vec![2, 3, 4], data).unwrap();
        let f = t.fuse(&["c", "a"], "ca").unwrap();
        assert_eq!(f.shape(), &[3, 8]);
        let s = f.split("ca", &[("c", 4), ("a", 2)]).unwrap();
        let back = s.permute(&["a", "b", "c"]).unwrap();
        assert_eq!(back, t);
    }
}
