/** Label colors; must match the server's indexed-PNG palette. */
export const LABEL_PALETTE: ReadonlyArray<readonly [number, number, number]> = [
  [230, 25, 75],
  [60, 180, 75],
  [255, 225, 25],
  [0, 130, 200],
  [245, 130, 48],
  [145, 30, 180],
  [70, 240, 240],
  [240, 50, 230],
  [210, 245, 60],
  [250, 190, 212],
];

export function labelColor(label: number): string {
  const [r, g, b] = LABEL_PALETTE[label % LABEL_PALETTE.length];
  return `rgb(${r}, ${g}, ${b})`;
}
