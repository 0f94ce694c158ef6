class SolveCode:
    SUCCESS = 0
    ERROR = 1
    VALIDATION_ERROR = 2
    IO_ERROR = 3
    INFEASIBLE = 10
    UNBOUNDED = 11
    ITERATION_LIMIT = 12
    UNSUPPORTED_ATOM = 20
    CAP_EXCEEDED = 21
    BAD_DIMS = 22
    DIMENSION_MISMATCH = 23
    SHAPE_MISMATCH = 24
    MISSING_BOUNDS = 25
    CONFIG_ERROR = 30


class SolveMsg:
    SUCCESS = "success"
    ERROR = "error"
    VALIDATION_ERROR = "validation failed"
    IO_ERROR = "文件读写失败"
    INFEASIBLE = "可行域为空 (phase-1 无可行解)"
    UNBOUNDED = "目标函数在可行域上无下界"
    ITERATION_LIMIT = "达到最大迭代次数"
    UNSUPPORTED_ATOM = "该原子函数无法降阶为 LP/QP 标准形"
    CAP_EXCEEDED = "枚举规模超过上限"
    BAD_DIMS = "维度参数不合法"
    DIMENSION_MISMATCH = "向量维度与原子函数不匹配"
    SHAPE_MISMATCH = "形状不满足计算前提"
    MISSING_BOUNDS = "缺少 S-bounds"
    CONFIG_ERROR = "配置错误"
