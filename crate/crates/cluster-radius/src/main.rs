fn main() {
    std::process::exit(cluster_radius::cli::run(std::env::args()));
}
