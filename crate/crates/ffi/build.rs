fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(b) => {
            b.write_to_file(format!("{crate_dir}/include/metivier.h"));
        }
        Err(e) => println!("cargo:warning=header not generated: {e}"),
    }
}
