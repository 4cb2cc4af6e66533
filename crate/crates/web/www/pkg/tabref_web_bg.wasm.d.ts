/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_treeplayground_free: (a: number, b: number) => void;
export const costAndDeltas: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const exploreChain: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const treeplayground_add: (a: number, b: number, c: number) => [number, number, number, number];
export const treeplayground_branch: (a: number, b: number, c: number) => [number, number, number, number];
export const treeplayground_fromJson: (a: number, b: number) => [number, number, number];
export const treeplayground_inspect: (a: number) => [number, number];
export const treeplayground_new: () => number;
export const treeplayground_routes: (a: number) => [number, number];
export const treeplayground_sample: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const treeplayground_split: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const treeplayground_toJson: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
