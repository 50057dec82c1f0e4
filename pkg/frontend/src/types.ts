// Payload shapes of the inspector HTTP API. The UI renders these verbatim;
// it never computes Q-values or explanations itself.

export interface SceneCell {
  height: number;
  normal: [number, number, number];
  color: number | null;
}

export interface SceneObjectDoc {
  id: number;
  shape: string;
  color_rank: number | null;
  footprint: [number, number][];
  removed: boolean;
}

export interface SceneDoc {
  format_version: number;
  scenario: "grasp" | "land";
  width: number;
  height: number;
  palette: string[];
  step_limit: number;
  steps_elapsed: number;
  cells: SceneCell[];
  objects: SceneObjectDoc[];
}

export interface QMapsPayload {
  component_names: string[];
  weights: number[];
  maps: number[][][]; // [component][row][col]
  composite: number[][];
  selected: { u: number; v: number; primitive: string };
}

export interface CandidateDoc {
  name: string;
  label: string;
  pixel: [number, number];
  primitive: string;
  values: Record<string, number>;
  overall: number;
}

export interface RdxDoc {
  pair: [string, string];
  pixels: [[number, number], [number, number]];
  deltas: Record<string, number>;
}

export interface BundleDoc {
  format_version: number;
  scene_id: string;
  scenario: string;
  palette: string[];
  component_names: string[];
  weights: number[];
  selected: CandidateDoc;
  candidates: CandidateDoc[];
  shallow: {
    pixel: [number, number];
    component_values: Record<string, number>;
    dominant: string;
  };
  rdx: RdxDoc[];
  texts: { shallow: string; contrastive: Record<string, string> };
}

export interface ActOutcome {
  pixel: [number, number];
  primitive: string;
  reward: Record<string, number>;
  total: number;
  done: boolean;
  info: Record<string, unknown>;
}

export interface ChatReply {
  answer: string;
}

export interface ApiError {
  error: string;
  message: string;
}
