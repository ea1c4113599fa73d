fn main() {
    graspgeom::cli::init_logging();
    std::process::exit(graspgeom::cli::main_with_args(std::env::args_os()));
}
