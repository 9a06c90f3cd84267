// Never terminates; the harness has to kill it.
function fib(n) {
  for (;;) {}
}
