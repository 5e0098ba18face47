/* tslint:disable */
/* eslint-disable */

/**
 * `p±` and both lattice paths for rotation number `theta` and multiplicity `m`.
 */
export function lattice_paths(theta: string, m: number): string;

/**
 * Iterates of the page return map starting at `(x, y)`.
 */
export function return_map_orbit(a: string, b: string, x: number, y: number, steps: number): string;

/**
 * `N_k²/(2k)` along the first `k` generators of the ellipsoid `E(a, b)`.
 */
export function spectrum_curve(a: string, b: string, k: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly lattice_paths: (a: number, b: number, c: number) => [number, number];
    readonly return_map_orbit: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly spectrum_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
