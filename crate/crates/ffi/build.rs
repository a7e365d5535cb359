use std::env;
use std::path::PathBuf;

use cbindgen::{Config, EnumConfig, Language, RenameRule};

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    let config = Config {
        language: Language::C,
        cpp_compat: true,
        usize_is_size_t: true,
        include_guard: Some("SELFTRIG_H".into()),
        sys_includes: vec!["stddef.h".into(), "stdint.h".into(), "stdbool.h".into()],
        no_includes: true,
        enumeration: EnumConfig {
            rename_variants: RenameRule::ScreamingSnakeCase,
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };
    match cbindgen::generate_with_config(&crate_dir, config) {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include").join("selftrig.h"));
        }
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
