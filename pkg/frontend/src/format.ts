// Every number the UI displays passes through exactly one of these helpers,
// applied directly to a value taken from a service response. Keeping them
// pure and centralized is what makes the no-local-computation property
// checkable: tests re-apply the same helpers to intercepted payloads.

export function pct(fraction: number): string {
  return `${(fraction * 100).toFixed(0)}%`;
}

export function score(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(4);
}

export function mean(value: number): string {
  return value.toFixed(2);
}

export function count(value: number): string {
  return String(value);
}
