fn main() {
    // LAPACK symbols (dsyevd_) come from the system OpenBLAS, which on this
    // class of systems bundles the full LAPACK. Fall back to plain
    // liblapack via SWION_LAPACK_LIB if needed.
    let lib = std::env::var("SWION_LAPACK_LIB").unwrap_or_else(|_| "openblas".to_string());
    println!("cargo:rustc-link-lib=dylib={lib}");
    println!("cargo:rerun-if-env-changed=SWION_LAPACK_LIB");
}
