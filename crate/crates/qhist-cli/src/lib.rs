pub fn run<I, S>(_args: I, _out: &mut dyn std::io::Write, _err: &mut dyn std::io::Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    0
}
