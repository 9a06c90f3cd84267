// Fast doubling, same algorithm as the reference.
function fib(n) {
  function go(k) {
    if (k === 0n) return [0n, 1n];
    const [a, b] = go(k / 2n);
    const c = a * (2n * b - a);
    const d = a * a + b * b;
    return k % 2n === 0n ? [c, d] : [d, c + d];
  }
  return go(BigInt(n))[0];
}
