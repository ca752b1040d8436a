fn main() {
    std::process::exit(sensornet::cli::main());
}
