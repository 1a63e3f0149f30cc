//! Home of the `acceptance` test target; run it with
//! `cargo test -p wgmsim-validation --test acceptance`.
