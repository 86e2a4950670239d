export interface TaskSummary {
  task_id: string;
  question: string;
  dialect: string;
  remediation: boolean;
}

export interface ActionParam {
  name: string;
  shape: "string" | "list";
}

export interface ActionEntry {
  name: string;
  kind: string;
  description: string;
  usage: string;
  required_params: ActionParam[];
  optional_params: ActionParam[];
}

export interface ObservationPayload {
  klass: string;
  text: string;
  structured: Record<string, unknown> | null;
}

export interface RewardPayload {
  value: number;
  relation: string;
}

export interface StepPayload {
  observation: ObservationPayload;
  reward: RewardPayload;
  terminated: boolean;
  truncated: boolean;
  info: Record<string, unknown>;
}

export interface TrajectoryStepPayload {
  step_index: number;
  raw_action_text: string;
  observation: ObservationPayload;
  reward: RewardPayload;
  wall_ms: number;
}

export interface LineageEntry {
  cte_id: string;
  parent_ids: string[];
}

export interface TrajectoryPayload {
  task_id: string;
  seed: number;
  steps: TrajectoryStepPayload[];
  lineage: LineageEntry[];
  status: string;
}

export interface ConsoleConfig {
  serviceUrl: string;
}
