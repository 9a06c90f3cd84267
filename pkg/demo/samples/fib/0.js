// Naive exponential recursion: correct, hopeless beyond small n.
function fib(n) {
  if (n < 2) return BigInt(n);
  return fib(n - 1) + fib(n - 2);
}
