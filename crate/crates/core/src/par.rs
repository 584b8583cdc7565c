//! Data-parallel helpers. With the `parallel` feature the work fans out on
//! rayon's pool when the caller asks for it; otherwise everything runs on the
//! calling thread. Output order always matches input order.

/// Runtime choice between the rayon path and the sequential fallback.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn try_map<T, R, E, F>(exec: Exec, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_preserve_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = map(Exec::Sequential, &xs, |x| x * 3);
        let par = map(Exec::Parallel, &xs, |x| x * 3);
        assert_eq!(seq, par);
        let err: Result<Vec<u32>, u32> = try_map(Exec::Parallel, &xs, |&x| if x == 500 { Err(x) } else { Ok(x) });
        assert_eq!(err, Err(500));
    }
}
