fn main() {
    println!("modparam");
}
