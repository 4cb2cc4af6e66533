/* tslint:disable */
/* eslint-disable */

export class TreePlayground {
    free(): void;
    [Symbol.dispose](): void;
    add(route: string): string;
    branch(addition: string): string;
    static fromJson(text: string): TreePlayground;
    inspect(): string;
    constructor();
    routes(): string;
    sample(route: string, seed: bigint): string;
    split(route: string, existing: string, _new: string): string;
    toJson(): string;
}

export function costAndDeltas(input: number, output: number, baseline_input: number, baseline_output: number, baseline_outcomes: string, treated_outcomes: string): string;

export function exploreChain(table_text: string, chain_text: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_treeplayground_free: (a: number, b: number) => void;
    readonly costAndDeltas: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly exploreChain: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly treeplayground_add: (a: number, b: number, c: number) => [number, number, number, number];
    readonly treeplayground_branch: (a: number, b: number, c: number) => [number, number, number, number];
    readonly treeplayground_fromJson: (a: number, b: number) => [number, number, number];
    readonly treeplayground_inspect: (a: number) => [number, number];
    readonly treeplayground_new: () => number;
    readonly treeplayground_routes: (a: number) => [number, number];
    readonly treeplayground_sample: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly treeplayground_split: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly treeplayground_toJson: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
